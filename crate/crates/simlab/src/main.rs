use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dirlin::hypothesis::{
    gof_bootstrap_test, indep_test, lcv_bandwidths, statistic_grid, BandwidthRule, Calibration, GofOptions, IndepOptions, SearchBox};
use dirlin::inference::{fit_model, FitOptions};
use dirlin::kde::Bandwidths;
use dirlin::kernel::KernelPair;
use dirlin::models::{make_model, model_from_text, JointModel, JointSample, MixtureAlternative, ModelId};
use dirlin::rng::{label, real_key, stream};
use dirlin::special::Support;

use dirlin_simlab::analyze::{analyze_dataset, AnalyzeOptions};
use dirlin_simlab::config::{parse_list, parse_pair, Experiment, ExperimentConfig};
use dirlin_simlab::data::{dataset_text, read_dataset};
use dirlin_simlab::experiments::*;
use dirlin_simlab::output::{ensure_dir, fmt_f64, write_table};
use dirlin_simlab::{SimError, SimResult};

#[derive(Parser, Debug)]
#[command(name = "dirlin", version, about = "Kernel density tests for directional-linear and directional-directional data")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Flat key=value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long = "grid-circle", global = true)]
    grid_circle: Option<usize>,
    #[arg(long = "grid-line", global = true)]
    grid_line: Option<usize>,
    #[arg(long = "grid-torus", global = true)]
    grid_torus: Option<usize>,
    #[arg(long, global = true)]
    truncation: Option<f64>,
    /// Fixed bandwidths `h,g`; LCV otherwise.
    #[arg(long, global = true)]
    bandwidths: Option<String>,
    #[arg(long = "B", global = true)]
    b: Option<usize>,
    #[arg(long = "M", global = true)]
    m: Option<usize>,
    /// Catalog id (CL1..CL12, CC1..CC12), comma list for experiments.
    #[arg(long, global = true)]
    model: Option<String>,
    /// Parameter file for `--model custom`.
    #[arg(long = "model-file", global = true)]
    model_file: Option<PathBuf>,
    #[arg(long, global = true)]
    alpha: Option<String>,
    /// Sample sizes, comma separated.
    #[arg(long, global = true)]
    n: Option<String>,
    #[arg(long, global = true)]
    delta: Option<String>,
    /// Input angles are in degrees.
    #[arg(long, global = true)]
    degrees: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check kernel constants against closed forms.
    Constants,
    /// Kernel density estimate of a dataset on the statistic grid.
    Kde {
        #[arg(long)]
        data: PathBuf,
    },
    /// Maximum-likelihood fit of a catalog family.
    Fit {
        #[arg(long)]
        data: PathBuf,
    },
    /// Independence test.
    TestIndep {
        #[arg(long)]
        data: PathBuf,
        /// permutation or asymptotic.
        #[arg(long, default_value = "permutation")]
        method: String,
        /// Second coordinate is an angle.
        #[arg(long)]
        torus: bool,
    },
    /// Bootstrap goodness-of-fit test.
    TestGof {
        #[arg(long)]
        data: PathBuf,
    },
    /// Draw a sample from a model or its mixture alternative.
    Simulate {
        #[arg(long = "size", default_value_t = 100)]
        size: usize,
    },
    /// Monte Carlo size and power of the goodness-of-fit test.
    McSizePower,
    /// Rejection-rate surface over a bandwidth grid.
    McBandwidthGrid,
    /// Standardized independence statistic against its normal limit.
    McClt,
    /// Full workflow on a dataset: LCV, fit, bootstrap test, report and plot.
    Analyze {
        #[arg(long)]
        data: PathBuf,
    },
}

fn usage(m: impl Into<String>) -> SimError {
    SimError::Usage(m.into())
}

fn experiment_config(g: &Global, exp: Experiment) -> SimResult<ExperimentConfig> {
    let mut c = ExperimentConfig::defaults(exp);
    if let Some(p) = &g.config {
        let text = std::fs::read_to_string(p).map_err(|e| usage(format!("cannot read config {}: {e}", p.display())))?;
        c.apply_text(&text)?;
        c.experiment = exp;
    }
    let pairs: [(&str, Option<String>); 13] = [
        ("seed", g.seed.map(|v| v.to_string())),
        ("threads", g.threads.map(|v| v.to_string())),
        ("out", g.out.as_ref().map(|p| p.display().to_string())),
        ("grid_circle", g.grid_circle.map(|v| v.to_string())),
        ("grid_line", g.grid_line.map(|v| v.to_string())),
        ("grid_torus", g.grid_torus.map(|v| v.to_string())),
        ("truncation", g.truncation.map(|v| v.to_string())),
        ("bandwidths", g.bandwidths.clone()),
        ("B", g.b.map(|v| v.to_string())),
        ("M", g.m.map(|v| v.to_string())),
        ("models", g.model.clone()),
        ("alpha", g.alpha.clone()),
        ("n", g.n.clone()),
    ];
    for (k, v) in pairs.into_iter().chain([("delta", g.delta.clone())]) {
        if let Some(v) = v {
            c.set(k, &v)?;
        }
    }
    c.validate()?;
    Ok(c)
}

fn template(g: &Global) -> SimResult<JointModel> {
    let id: ModelId = g.model.as_deref().ok_or_else(|| usage("--model is required"))?.parse()?;
    if id == ModelId::Custom {
        let p = g.model_file.as_ref().ok_or_else(|| usage("--model custom needs --model-file"))?;
        let text = std::fs::read_to_string(p).map_err(|e| usage(format!("cannot read {}: {e}", p.display())))?;
        return Ok(model_from_text(&text)?);
    }
    Ok(make_model(id, &[])?)
}

fn fixed_bandwidths(g: &Global) -> SimResult<Option<Bandwidths>> {
    g.bandwidths.as_deref().map(|s| parse_pair("bandwidths", s).map(|(h, g)| Bandwidths { h, g })).transpose()
}

fn bandwidths(g: &Global, sample: &JointSample, kernel: &KernelPair) -> SimResult<(Bandwidths, BandwidthRule)> {
    match fixed_bandwidths(g)? {
        Some(bw) => Ok((bw, BandwidthRule::Fixed)),
        None => Ok((lcv_bandwidths(sample, kernel, &SearchBox::for_sample(sample))?.bw, BandwidthRule::Lcv)),
    }
}

fn grid_spec(g: &Global) -> SimResult<dirlin::hypothesis::GridSpec> {
    Ok(experiment_config(g, Experiment::Analyze)?.grid)
}

fn out_dir(g: &Global, cfg: &ExperimentConfig) -> SimResult<PathBuf> {
    let d = g.out.clone().unwrap_or_else(|| cfg.out_dir.clone());
    ensure_dir(&d)?;
    Ok(d)
}

fn write_or_print(g: &Global, name: &str, text: &str) -> SimResult<()> {
    match &g.out {
        Some(d) => {
            ensure_dir(d)?;
            std::fs::write(d.join(name), text)?;
            println!("wrote {}", d.join(name).display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> SimResult<()> {
    let g = &cli.global;
    if let Some(t) = g.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().map_err(|e| usage(e.to_string()))?;
    }
    let kernel = KernelPair::default();
    match &cli.command {
        Command::Constants => {
            let checks = run_constants_check()?;
            print!("{}", constants_table(&checks));
            if checks.iter().any(|c| !c.pass()) {
                return Err(SimError::Numeric("constant check failed".into()));
            }
        }
        Command::Kde { data } => {
            let d = read_dataset(data, support_of(g)?, g.degrees)?;
            let (bw, _) = bandwidths(g, &d.sample, &kernel)?;
            let grid = statistic_grid(&d.sample, &bw, &grid_spec(g)?)?;
            let f = dirlin::hypothesis::grid_kernels(&d.sample, &grid, &bw, &kernel)?.joint();
            let (a, b) = grid.shape();
            let mut rows = Vec::with_capacity(a * b);
            grid.for_each(|i, j, p, _| {
                let second = if d.sample.support() == Support::CircleCircle { p.psi() } else { p.z() };
                rows.push(vec![fmt_f64(p.theta()), fmt_f64(second), fmt_f64(f[[i, j]])]);
            });
            let dir = g.out.clone().unwrap_or_else(|| PathBuf::from("."));
            ensure_dir(&dir)?;
            write_table(&dir.join("kde.csv"), &["theta", "second", "density"], &rows)?;
            println!("h={}\ng={}\nwrote {}", bw.h, bw.g, dir.join("kde.csv").display());
        }
        Command::Fit { data } => {
            let t = template(g)?;
            let d = read_dataset(data, t.support(), g.degrees)?;
            let mut rng = stream(g.seed.unwrap_or(1), &[label("fit")]);
            let (_, r) = fit_model(&t, &d.sample, &mut rng, &FitOptions::default(), None)?;
            print!("model={}\n{}", t.id(), r.to_text(&t.param_names()));
        }
        Command::TestIndep { data, method, torus } => {
            let support = if *torus { Support::CircleCircle } else { Support::CircleLine };
            let d = read_dataset(data, support, g.degrees)?;
            let (bw, rule) = bandwidths(g, &d.sample, &kernel)?;
            let method: Calibration = method.parse()?;
            let opts = IndepOptions { method, b: g.b.unwrap_or(1000), seed: g.seed.unwrap_or(1), grid: grid_spec(g)? };
            let mut r = indep_test(&d.sample, &bw, &kernel, &opts)?;
            r.bandwidth_rule = rule;
            print!("{}", r.to_text());
        }
        Command::TestGof { data } => {
            let t = template(g)?;
            let d = read_dataset(data, t.support(), g.degrees)?;
            let (bw, rule) = bandwidths(g, &d.sample, &kernel)?;
            let opts = GofOptions { b: g.b.unwrap_or(1000), seed: g.seed.unwrap_or(1), grid: grid_spec(g)?, ..GofOptions::default() };
            let mut r = gof_bootstrap_test(&d.sample, &t, &bw, &kernel, &opts)?;
            r.bandwidth_rule = rule;
            print!("{}", r.to_text());
        }
        Command::Simulate { size } => {
            let t = template(g)?;
            let delta = match &g.delta {
                Some(s) => match parse_list::<f64>("delta", s)?.as_slice() {
                    [d] => *d,
                    _ => return Err(usage("simulate takes a single --delta")),
                },
                None => 0.0,
            };
            let alt = MixtureAlternative::for_catalog(t.clone(), delta)?;
            let seed = g.seed.unwrap_or(1);
            let s = alt.sample(*size, &mut stream(seed, &[label("simulate"), label(&t.id().to_string()), *size as u64, real_key(delta)]))?;
            write_or_print(g, "sample.csv", &dataset_text(&s))?;
        }
        Command::McSizePower => {
            let cfg = experiment_config(g, Experiment::SizePower)?;
            let dir = out_dir(g, &cfg)?;
            let out = run_size_power(&cfg)?;
            write_size_power(&dir, &out)?;
            for r in &out.rows {
                println!(
                    "{} n={} delta={} alpha={} rate={:.3} se={:.3} M={}{}",
                    r.model,
                    r.n,
                    r.delta,
                    r.alpha,
                    r.rejection_rate,
                    r.mc_se,
                    r.m,
                    if r.flagged { " FLAGGED" } else { "" }
                );
            }
        }
        Command::McBandwidthGrid => {
            let cfg = experiment_config(g, Experiment::BandwidthGrid)?;
            let dir = out_dir(g, &cfg)?;
            let out = run_bandwidth_grid(&cfg)?;
            write_bandwidth_grid(&dir, &out)?;
            println!("{} cells written to {}", out.cells.len(), dir.join("bandwidth_grid.csv").display());
        }
        Command::McClt => {
            let cfg = experiment_config(g, Experiment::CltConvergence)?;
            let dir = out_dir(g, &cfg)?;
            let out = run_clt(&cfg)?;
            write_clt(&dir, &out, cfg.master_seed)?;
            for s in &out.summaries {
                println!(
                    "n={} M={} mean={:.4} (se {:.4}) var={:.4e} (se {:.1e}) limit_var={:.4e} KS={:.4} p={:.3e}",
                    s.n,
                    s.m,
                    s.mean,
                    s.mean_se,
                    s.variance,
                    s.variance_se,
                    2.0 * s.constants.sigma_i_sq,
                    s.ks.statistic,
                    s.ks.p_value
                );
            }
        }
        Command::Analyze { data } => {
            let t = template(g)?;
            let opts = AnalyzeOptions {
                b: g.b.unwrap_or(1000),
                seed: g.seed.unwrap_or(1),
                degrees: g.degrees,
                grid: grid_spec(g)?,
                bandwidths: fixed_bandwidths(g)?,
            };
            let a = analyze_dataset(data, &t, &opts)?;
            print!("{}", a.summary());
            let dir = g.out.clone().unwrap_or_else(|| PathBuf::from("."));
            ensure_dir(&dir)?;
            let stem = Path::new(data).file_stem().and_then(|s| s.to_str()).unwrap_or("data");
            let svg = dir.join(format!("{stem}_fit.svg"));
            std::fs::write(&svg, a.density_svg()?)?;
            println!("plot={}", svg.display());
        }
    }
    Ok(())
}

/// Support implied by `--model`, defaulting to circle-line.
fn support_of(g: &Global) -> SimResult<Support> {
    match &g.model {
        Some(_) => Ok(template(g)?.support()),
        None => Ok(Support::CircleLine),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
