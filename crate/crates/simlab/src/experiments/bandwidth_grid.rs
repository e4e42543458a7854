//! Rejection-rate surface over a log-spaced bandwidth grid. Every cell sees
//! the same Monte Carlo samples and the same bootstrap streams.

use std::path::Path;

use rayon::prelude::*;

use dirlin::hypothesis::lcv::log_grid;
use dirlin::hypothesis::{gof_bootstrap_test, GofOptions};
use dirlin::kde::Bandwidths;
use dirlin::kernel::KernelPair;
use dirlin::models::{make_model, JointSample, MixtureAlternative, ModelId};
use dirlin::rng::{derive_seed, label, stream};

use super::size_power::sample_key;
use crate::config::ExperimentConfig;
use crate::error::{SimError, SimResult};
use crate::output::{fmt_f64, mc_se, write_table};
use crate::svg::heat_map;

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceCell {
    pub model: ModelId,
    pub n: usize,
    pub h: f64,
    pub g: f64,
    pub delta: f64,
    pub alpha: f64,
    pub rate: f64,
    pub m: usize,
    pub mc_se: f64,
}

/// Fingerprint of the sample a cell tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleDigest {
    pub cell: usize,
    pub delta_index: usize,
    pub replicate: usize,
    pub digest: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthGridOutput {
    pub cells: Vec<SurfaceCell>,
    pub digests: Vec<SampleDigest>,
    pub h_values: Vec<f64>,
    pub g_values: Vec<f64>,
}

/// FNV-1a over the bit patterns of both coordinates.
pub fn sample_digest(s: &JointSample) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in s.theta().iter().chain(s.second().iter()) {
        for b in v.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01B3);
        }
    }
    h
}

pub fn run_bandwidth_grid(cfg: &ExperimentConfig) -> SimResult<BandwidthGridOutput> {
    cfg.validate()?;
    let kernel = KernelPair::default();
    let k = cfg.bw_grid_size;
    let hs = log_grid(cfg.bw_h_range.0, cfg.bw_h_range.1, k);
    let gs = log_grid(cfg.bw_g_range.0, cfg.bw_g_range.1, k);
    let bws: Vec<Bandwidths> = hs.iter().flat_map(|&h| gs.iter().map(move |&g| Bandwidths { h, g })).collect();
    let mut cells = Vec::new();
    let mut digests = Vec::new();
    for &id in &cfg.models {
        let base = make_model(id, &[])?;
        for &n in &cfg.n_list {
            for (di, &delta) in cfg.delta_list.iter().enumerate() {
                let alt = MixtureAlternative::for_catalog(base.clone(), delta)?;
                // per replicate: p-value of every cell, or None on failure
                let per_rep: Vec<(Vec<Option<f64>>, Vec<u64>)> = (0..cfg.m)
                    .into_par_iter()
                    .map(|m| {
                        let key = sample_key("bandwidthGrid", id, n, delta, m);
                        let boot_seed = derive_seed(cfg.master_seed, &[key[0], key[1], key[2], key[3], key[4], label("bootstrap")]);
                        let sample = alt.sample(n, &mut stream(cfg.master_seed, &key));
                        let mut ps = Vec::with_capacity(bws.len());
                        let mut ds = Vec::with_capacity(bws.len());
                        for bw in &bws {
                            let Ok(s) = &sample else {
                                ps.push(None);
                                ds.push(0);
                                continue;
                            };
                            ds.push(sample_digest(s));
                            let opts = GofOptions { b: cfg.b, seed: boot_seed, grid: cfg.grid, ..GofOptions::default() };
                            ps.push(gof_bootstrap_test(s, &base, bw, &kernel, &opts).ok().map(|r| r.p_value));
                        }
                        (ps, ds)
                    })
                    .collect();
                for (m, (_, ds)) in per_rep.iter().enumerate() {
                    for (cell, &d) in ds.iter().enumerate() {
                        digests.push(SampleDigest { cell, delta_index: di, replicate: m, digest: d });
                    }
                }
                for &alpha in &cfg.alpha_list {
                    for (c, bw) in bws.iter().enumerate() {
                        let ok: Vec<f64> = per_rep.iter().filter_map(|(ps, _)| ps[c]).collect();
                        if ok.is_empty() {
                            return Err(SimError::Numeric(format!("no successful replicate at h = {}, g = {}", bw.h, bw.g)));
                        }
                        let rate = ok.iter().filter(|&&p| p < alpha).count() as f64 / ok.len() as f64;
                        cells.push(SurfaceCell { model: id, n, h: bw.h, g: bw.g, delta, alpha, rate, m: ok.len(), mc_se: mc_se(rate, ok.len()) });
                    }
                }
            }
        }
    }
    Ok(BandwidthGridOutput { cells, digests, h_values: hs, g_values: gs })
}

pub const SURFACE_HEADER: [&str; 9] = ["model", "n", "h", "g", "delta", "alpha", "rate", "M", "mc_se"];

pub fn write_bandwidth_grid(dir: &Path, out: &BandwidthGridOutput) -> SimResult<()> {
    let rows: Vec<Vec<String>> = out
        .cells
        .iter()
        .map(|c| {
            vec![
                c.model.to_string(),
                c.n.to_string(),
                fmt_f64(c.h),
                fmt_f64(c.g),
                fmt_f64(c.delta),
                fmt_f64(c.alpha),
                fmt_f64(c.rate),
                c.m.to_string(),
                fmt_f64(c.mc_se),
            ]
        })
        .collect();
    write_table(&dir.join("bandwidth_grid.csv"), &SURFACE_HEADER, &rows)?;
    let digest_rows: Vec<Vec<String>> = out
        .digests
        .iter()
        .map(|d| vec![d.cell.to_string(), d.delta_index.to_string(), d.replicate.to_string(), format!("{:016x}", d.digest)])
        .collect();
    write_table(&dir.join("bandwidth_grid_digests.csv"), &["cell", "delta_index", "replicate", "digest"], &digest_rows)?;
    let k = out.h_values.len();
    let mut groups: Vec<(ModelId, usize, f64, f64)> = Vec::new();
    for c in &out.cells {
        let key = (c.model, c.n, c.delta, c.alpha);
        if !groups.contains(&key) {
            groups.push(key);
        }
    }
    for (model, n, delta, alpha) in groups {
        let vals: Vec<f64> = out
            .cells
            .iter()
            .filter(|c| c.model == model && c.n == n && c.delta == delta && c.alpha == alpha)
            .map(|c| c.rate)
            .collect();
        if vals.len() != k * k {
            continue;
        }
        let title = format!("{model} n={n} delta={delta} alpha={alpha}: rejection rate");
        let svg = heat_map(&vals, &out.h_values, &out.g_values, "h", "g", &title, Some((0.0, 1.0)));
        let name = format!("bandwidth_grid_{model}_n{n}_delta{delta}_alpha{alpha}.svg");
        std::fs::write(dir.join(name), svg)?;
    }
    Ok(())
}
