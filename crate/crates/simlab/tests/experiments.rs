use std::collections::HashMap;

use dirlin::hypothesis::classical::binomial_band;
use dirlin::hypothesis::BandwidthRule;
use dirlin::kde::Bandwidths;
use dirlin::models::ModelId;
use dirlin_simlab::config::{Experiment, ExperimentConfig};
use dirlin_simlab::experiments::*;
use dirlin_simlab::output::{mc_se, read_rows, write_rows};

fn small_size_power() -> ExperimentConfig {
    let mut c = ExperimentConfig::defaults(Experiment::SizePower);
    c.models = vec![ModelId::Cl(1)];
    c.n_list = vec![40];
    c.delta_list = vec![0.0, 0.5];
    c.alpha_list = vec![0.05, 0.2];
    c.m = 6;
    c.b = 9;
    c.master_seed = 17;
    c
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

fn without_elapsed(path: &std::path::Path) -> String {
    let text = std::fs::read_to_string(path).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "elapsed_s");
    text.lines()
        .map(|l| {
            let mut f: Vec<&str> = l.split(',').collect();
            if let Some(c) = col {
                f.remove(c);
            }
            f.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn size_power_is_deterministic_across_thread_counts() {
    let cfg = small_size_power();
    let a = in_pool(1, || run_size_power(&cfg).unwrap());
    let b = in_pool(3, || run_size_power(&cfg).unwrap());
    assert_eq!(a.replicates, b.replicates);
    let (da, db) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    write_size_power(da.path(), &a).unwrap();
    write_size_power(db.path(), &b).unwrap();
    let name = "size_power_replicates.csv";
    assert_eq!(std::fs::read(da.path().join(name)).unwrap(), std::fs::read(db.path().join(name)).unwrap());
    assert_eq!(without_elapsed(&da.path().join("size_power.csv")), without_elapsed(&db.path().join("size_power.csv")));
}

#[test]
fn result_rows_are_consistent_and_round_trip() {
    let cfg = small_size_power();
    let out = run_size_power(&cfg).unwrap();
    assert_eq!(out.rows.len(), 4);
    for r in &out.rows {
        assert!((0.0..=1.0).contains(&r.rejection_rate));
        assert_eq!(r.mc_se, mc_se(r.rejection_rate, r.m));
        let k = (r.rejection_rate * r.m as f64).round();
        assert!((k / r.m as f64 - r.rejection_rate).abs() < 1e-15);
    }
    // a larger alpha rejects at least as often
    for pair in out.rows.chunks(2) {
        assert!(pair[1].rejection_rate >= pair[0].rejection_rate);
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.csv");
    write_rows(&path, &out.rows).unwrap();
    assert_eq!(read_rows(&path).unwrap(), out.rows);
}

#[test]
fn single_replicate_rate_is_zero_or_one() {
    for id in [ModelId::Cl(2), ModelId::Cc(3)] {
        let mut c = small_size_power();
        c.models = vec![id];
        c.m = 1;
        c.delta_list = vec![0.1];
        let out = run_size_power(&c).unwrap();
        for r in &out.rows {
            assert!(r.rejection_rate == 0.0 || r.rejection_rate == 1.0, "{r:?}");
        }
    }
}

#[test]
fn fixed_rule_uses_the_given_bandwidths() {
    let mut c = small_size_power();
    c.bandwidth_rule = BandwidthRule::Fixed;
    c.bandwidths = Some(Bandwidths { h: 0.4, g: 0.3 });
    c.m = 2;
    let out = run_size_power(&c).unwrap();
    assert!(out.replicates.iter().all(|r| r.bandwidths == Some(Bandwidths { h: 0.4, g: 0.3 })));
}

fn small_grid(model: ModelId, deltas: Vec<f64>, m: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::defaults(Experiment::BandwidthGrid);
    c.models = vec![model];
    c.n_list = vec![100];
    c.delta_list = deltas;
    c.bw_grid_size = 2;
    c.m = m;
    c.b = 19;
    c.master_seed = 3;
    c
}

#[test]
fn bandwidth_grid_shape_and_sample_reuse() {
    let c = small_grid(ModelId::Cl(1), vec![0.0, 0.15], 3);
    let out = run_bandwidth_grid(&c).unwrap();
    assert_eq!(out.cells.len(), 2 * 2 * 2);
    let mut by_rep: HashMap<(usize, usize), Vec<u64>> = HashMap::new();
    for d in &out.digests {
        by_rep.entry((d.delta_index, d.replicate)).or_default().push(d.digest);
    }
    assert_eq!(by_rep.len(), 2 * 3);
    for v in by_rep.values() {
        assert_eq!(v.len(), 4);
        assert!(v.iter().all(|d| *d == v[0]));
    }
    let dir = tempfile::tempdir().unwrap();
    write_bandwidth_grid(dir.path(), &out).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("bandwidth_grid.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 8);
    assert!(csv.starts_with("model,n,h,g,delta,"));
    assert!(std::fs::read_dir(dir.path()).unwrap().any(|e| e.unwrap().path().extension().is_some_and(|x| x == "svg")));
}

#[test]
fn degenerate_alternative_raises_rates_on_average() {
    let c = small_grid(ModelId::Cl(2), vec![0.0, 1.0], 20);
    let out = run_bandwidth_grid(&c).unwrap();
    let mean = |d: f64| {
        let v: Vec<f64> = out.cells.iter().filter(|x| x.delta == d).map(|x| x.rate).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    assert!(mean(1.0) >= mean(0.0), "{} < {}", mean(1.0), mean(0.0));
}

#[test]
fn clt_summary_is_finite_and_uses_the_reference_variance() {
    let mut c = ExperimentConfig::defaults(Experiment::CltConvergence);
    c.n_list = vec![60];
    c.m = 12;
    let out = run_clt(&c).unwrap();
    let s = &out.summaries[0];
    assert!(s.mean.is_finite() && s.mean_se > 0.0 && s.variance > 0.0 && s.variance_se.is_finite());
    assert!((s.constants.sigma_i_sq - 2.54e-3).abs() < 1e-5);
    assert!((0.0..=1.0).contains(&s.ks.p_value));
    assert_eq!(out.values[0].1.len(), 12);
    let dir = tempfile::tempdir().unwrap();
    write_clt(dir.path(), &out, c.master_seed).unwrap();
    for f in ["clt_summary.csv", "clt_values.csv", "clt_histogram.csv"] {
        assert!(dir.path().join(f).exists());
    }
}

#[test]
fn constants_table_passes() {
    let checks = run_constants_check().unwrap();
    assert!(checks.iter().all(|c| c.pass()), "{}", constants_table(&checks));
}

#[test]
fn binomial_band_for_calibration_contains_nominal_level() {
    let (lo, hi) = binomial_band(0.05, 100, 0.95);
    assert!(lo < 0.05 && hi > 0.05);
}
