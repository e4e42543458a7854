//! Rejection rates of the bootstrap goodness-of-fit test under mixture
//! alternatives `(1 - delta) f + delta Delta`.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use dirlin::hypothesis::{gof_bootstrap_test, lcv_bandwidths, BandwidthRule, GofOptions, SearchBox};
use dirlin::kde::Bandwidths;
use dirlin::kernel::KernelPair;
use dirlin::models::{make_model, MixtureAlternative, ModelId};
use dirlin::rng::{derive_seed, label, real_key, stream};

use crate::config::ExperimentConfig;
use crate::error::{SimError, SimResult};
use crate::output::{fmt_f64, write_rows, write_table, ResultRow};

/// Outcome of one Monte Carlo replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateRecord {
    pub model: ModelId,
    pub n: usize,
    pub delta: f64,
    pub replicate: usize,
    /// `None` when the test could not be run on this sample.
    pub p_value: Option<f64>,
    pub statistic: f64,
    pub bandwidths: Option<Bandwidths>,
    pub flagged: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SizePowerOutput {
    pub rows: Vec<ResultRow>,
    pub replicates: Vec<ReplicateRecord>,
}

impl SizePowerOutput {
    pub fn p_values(&self, model: ModelId, n: usize, delta: f64) -> Vec<f64> {
        self.replicates
            .iter()
            .filter(|r| r.model == model && r.n == n && r.delta == delta)
            .filter_map(|r| r.p_value)
            .collect()
    }
}

/// Key of the replicate's sample stream.
pub fn sample_key(experiment: &str, model: ModelId, n: usize, delta: f64, replicate: usize) -> [u64; 5] {
    [label(experiment), label(&model.to_string()), n as u64, real_key(delta), replicate as u64]
}

pub(crate) fn bandwidths_for(
    cfg: &ExperimentConfig,
    sample: &dirlin::models::JointSample,
    kernel: &KernelPair,
) -> dirlin::Result<Bandwidths> {
    match (cfg.bandwidth_rule, cfg.bandwidths) {
        (BandwidthRule::Fixed, Some(bw)) => Ok(bw),
        _ => Ok(lcv_bandwidths(sample, kernel, &SearchBox::for_sample(sample))?.bw),
    }
}

pub fn run_size_power(cfg: &ExperimentConfig) -> SimResult<SizePowerOutput> {
    cfg.validate()?;
    let kernel = KernelPair::default();
    let mut rows = Vec::new();
    let mut replicates = Vec::new();
    for &id in &cfg.models {
        let base = make_model(id, &[])?;
        for &n in &cfg.n_list {
            for &delta in &cfg.delta_list {
                let start = Instant::now();
                let alt = MixtureAlternative::for_catalog(base.clone(), delta)?;
                let recs: Vec<ReplicateRecord> = (0..cfg.m)
                    .into_par_iter()
                    .map(|m| {
                        let key = sample_key("sizePower", id, n, delta, m);
                        let run = || -> dirlin::Result<(f64, f64, Bandwidths, bool)> {
                            let s = alt.sample(n, &mut stream(cfg.master_seed, &key))?;
                            let bw = bandwidths_for(cfg, &s, &kernel)?;
                            let opts = GofOptions {
                                b: cfg.b,
                                seed: derive_seed(cfg.master_seed, &[key[0], key[1], key[2], key[3], key[4], label("bootstrap")]),
                                grid: cfg.grid,
                                ..GofOptions::default()
                            };
                            let r = gof_bootstrap_test(&s, &base, &bw, &kernel, &opts)?;
                            Ok((r.p_value, r.statistic, bw, r.flagged))
                        };
                        match run() {
                            Ok((p, stat, bw, flagged)) => ReplicateRecord {
                                model: id,
                                n,
                                delta,
                                replicate: m,
                                p_value: Some(p),
                                statistic: stat,
                                bandwidths: Some(bw),
                                flagged,
                                error: None,
                            },
                            Err(e) => ReplicateRecord {
                                model: id,
                                n,
                                delta,
                                replicate: m,
                                p_value: None,
                                statistic: f64::NAN,
                                bandwidths: None,
                                flagged: true,
                                error: Some(e.to_string()),
                            },
                        }
                    })
                    .collect();
                let elapsed = start.elapsed().as_secs_f64();
                let ok: Vec<f64> = recs.iter().filter_map(|r| r.p_value).collect();
                if ok.is_empty() {
                    return Err(SimError::Numeric(format!("every replicate failed for {id}, n = {n}, delta = {delta}")));
                }
                let bad = recs.iter().filter(|r| r.flagged).count();
                for &alpha in &cfg.alpha_list {
                    let rejections = ok.iter().filter(|&&p| p < alpha).count();
                    let mut row = ResultRow::new(id, n, delta, alpha, rejections, ok.len(), cfg.master_seed);
                    row.elapsed_s = elapsed;
                    row.flagged = bad as f64 > 0.1 * cfg.m as f64;
                    rows.push(row);
                }
                replicates.extend(recs);
            }
        }
    }
    Ok(SizePowerOutput { rows, replicates })
}

pub const REPLICATE_HEADER: [&str; 10] = ["model", "n", "delta", "replicate", "p_value", "statistic", "h", "g", "flagged", "error"];

pub fn write_size_power(dir: &Path, out: &SizePowerOutput) -> SimResult<()> {
    write_rows(&dir.join("size_power.csv"), &out.rows)?;
    let rows: Vec<Vec<String>> = out
        .replicates
        .iter()
        .map(|r| {
            vec![
                r.model.to_string(),
                r.n.to_string(),
                fmt_f64(r.delta),
                r.replicate.to_string(),
                r.p_value.map(fmt_f64).unwrap_or_default(),
                fmt_f64(r.statistic),
                r.bandwidths.map(|b| fmt_f64(b.h)).unwrap_or_default(),
                r.bandwidths.map(|b| fmt_f64(b.g)).unwrap_or_default(),
                r.flagged.to_string(),
                r.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    write_table(&dir.join("size_power_replicates.csv"), &REPLICATE_HEADER, &rows)
}
