//! Experiment configuration: a flat `key=value` file plus flag overrides.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use dirlin::hypothesis::{BandwidthRule, GridSpec};
use dirlin::kde::Bandwidths;
use dirlin::models::joint::parse_key_values;
use dirlin::models::ModelId;

use crate::error::{SimError, SimResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    SizePower,
    BandwidthGrid,
    CltConvergence,
    Constants,
    Analyze,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Experiment::SizePower => "sizePower",
            Experiment::BandwidthGrid => "bandwidthGrid",
            Experiment::CltConvergence => "cltConvergence",
            Experiment::Constants => "constants",
            Experiment::Analyze => "analyze",
        })
    }
}

impl FromStr for Experiment {
    type Err = SimError;
    fn from_str(s: &str) -> SimResult<Self> {
        match s {
            "sizePower" => Ok(Experiment::SizePower),
            "bandwidthGrid" => Ok(Experiment::BandwidthGrid),
            "cltConvergence" => Ok(Experiment::CltConvergence),
            "constants" => Ok(Experiment::Constants),
            "analyze" => Ok(Experiment::Analyze),
            other => Err(SimError::Usage(format!("unknown experiment `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub models: Vec<ModelId>,
    pub n_list: Vec<usize>,
    pub delta_list: Vec<f64>,
    pub alpha_list: Vec<f64>,
    /// Monte Carlo replicates.
    pub m: usize,
    /// Bootstrap or permutation replicates.
    pub b: usize,
    pub bandwidth_rule: BandwidthRule,
    /// Used when the rule is `fixed`.
    pub bandwidths: Option<Bandwidths>,
    pub grid: GridSpec,
    pub master_seed: u64,
    pub out_dir: PathBuf,
    /// Cells per axis of the bandwidth surface.
    pub bw_grid_size: usize,
    pub bw_h_range: (f64, f64),
    pub bw_g_range: (f64, f64),
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    /// Desk-scale defaults for an experiment.
    pub fn defaults(experiment: Experiment) -> Self {
        let mut c = Self {
            experiment,
            models: vec![ModelId::Cl(1)],
            n_list: vec![100],
            delta_list: vec![0.0],
            alpha_list: vec![0.05],
            m: 200,
            b: 200,
            bandwidth_rule: BandwidthRule::Lcv,
            bandwidths: None,
            grid: GridSpec::default(),
            master_seed: 1,
            out_dir: PathBuf::from("out"),
            bw_grid_size: 4,
            bw_h_range: (0.15, 1.0),
            bw_g_range: (0.15, 1.0),
            threads: None,
        };
        match experiment {
            Experiment::BandwidthGrid => {
                c.delta_list = vec![0.0, 0.15];
                c.m = 100;
                c.b = 100;
                c.bandwidth_rule = BandwidthRule::Fixed;
            }
            Experiment::CltConvergence => {
                c.n_list = vec![1000];
                c.m = 300;
                c.bandwidth_rule = BandwidthRule::Fixed;
            }
            Experiment::Analyze => c.b = 1000,
            _ => {}
        }
        c
    }

    /// Applies `key=value` lines on top of the current values.
    pub fn apply_text(&mut self, text: &str) -> SimResult<()> {
        for (k, v) in parse_config(text)? {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> SimResult<Self> {
        let kv = parse_config(text)?;
        let experiment = kv
            .iter()
            .find(|(k, _)| k == "experiment")
            .map(|(_, v)| v.parse())
            .transpose()?
            .unwrap_or(Experiment::SizePower);
        let mut c = Self::defaults(experiment);
        for (k, v) in kv.iter().filter(|(k, _)| k != "experiment") {
            c.set(k, v)?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn set(&mut self, key: &str, value: &str) -> SimResult<()> {
        match key {
            "experiment" => self.experiment = value.parse()?,
            "models" | "model" => self.models = parse_list(key, value)?,
            "n" => self.n_list = parse_list(key, value)?,
            "delta" => self.delta_list = parse_list(key, value)?,
            "alpha" => self.alpha_list = parse_list(key, value)?,
            "M" => self.m = parse_one(key, value)?,
            "B" => self.b = parse_one(key, value)?,
            "bandwidth_rule" => {
                self.bandwidth_rule = match value {
                    "fixed" => BandwidthRule::Fixed,
                    "LCV" | "lcv" => BandwidthRule::Lcv,
                    other => return Err(SimError::Usage(format!("bandwidth_rule must be fixed or LCV, got `{other}`"))),
                }
            }
            "bandwidths" => {
                let (h, g) = parse_pair(key, value)?;
                self.bandwidths = Some(Bandwidths { h, g });
                self.bandwidth_rule = BandwidthRule::Fixed;
            }
            "grid_circle" => self.grid.circle = parse_one(key, value)?,
            "grid_line" => self.grid.line = parse_one(key, value)?,
            "grid_torus" => self.grid.torus = parse_one(key, value)?,
            "truncation" => self.grid.truncation = parse_one(key, value)?,
            "seed" => self.master_seed = parse_one(key, value)?,
            "out" => self.out_dir = PathBuf::from(value),
            "bw_grid" => self.bw_grid_size = parse_one(key, value)?,
            "bw_h" => self.bw_h_range = parse_pair(key, value)?,
            "bw_g" => self.bw_g_range = parse_pair(key, value)?,
            "threads" => self.threads = Some(parse_one(key, value)?),
            other => return Err(SimError::Usage(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> SimResult<()> {
        let bad = |m: String| Err(SimError::Usage(m));
        if self.m == 0 || self.b == 0 {
            return bad(format!("M and B must be at least 1 (M = {}, B = {})", self.m, self.b));
        }
        if let Some(d) = self.delta_list.iter().find(|d| !(0.0..=1.0).contains(*d)) {
            return bad(format!("delta {d} outside [0, 1]"));
        }
        if let Some(a) = self.alpha_list.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return bad(format!("alpha {a} outside (0, 1)"));
        }
        if self.n_list.iter().any(|&n| n < 3) {
            return bad("sample sizes must be at least 3".into());
        }
        if self.bandwidth_rule == BandwidthRule::Fixed && self.bandwidths.is_none() && self.experiment == Experiment::SizePower {
            return bad("fixed bandwidth rule needs `bandwidths=h,g`".into());
        }
        if self.grid.circle < 8 || self.grid.line < 8 || self.grid.torus < 8 || !(self.grid.truncation > 0.0) {
            return bad("grid needs at least 8 nodes per axis and a positive truncation".into());
        }
        let range_ok = |(a, b): (f64, f64)| a > 0.0 && b > a;
        if self.bw_grid_size == 0 || !range_ok(self.bw_h_range) || !range_ok(self.bw_g_range) {
            return bad("bandwidth surface needs a positive size and increasing ranges".into());
        }
        Ok(())
    }

    /// The configuration as `key=value` lines, readable by [`Self::from_text`].
    pub fn to_text(&self) -> String {
        let join = |v: Vec<String>| v.join(",");
        let mut s = format!(
            "experiment={}\nmodels={}\nn={}\ndelta={}\nalpha={}\nM={}\nB={}\nbandwidth_rule={}\n",
            self.experiment,
            join(self.models.iter().map(|m| m.to_string()).collect()),
            join(self.n_list.iter().map(|n| n.to_string()).collect()),
            join(self.delta_list.iter().map(|d| format!("{d:?}")).collect()),
            join(self.alpha_list.iter().map(|a| format!("{a:?}")).collect()),
            self.m,
            self.b,
            self.bandwidth_rule,
        );
        if let Some(bw) = self.bandwidths {
            s.push_str(&format!("bandwidths={:?},{:?}\n", bw.h, bw.g));
        }
        s.push_str(&format!(
            "grid_circle={}\ngrid_line={}\ngrid_torus={}\ntruncation={:?}\nseed={}\nout={}\nbw_grid={}\nbw_h={:?},{:?}\nbw_g={:?},{:?}\n",
            self.grid.circle,
            self.grid.line,
            self.grid.torus,
            self.grid.truncation,
            self.master_seed,
            self.out_dir.display(),
            self.bw_grid_size,
            self.bw_h_range.0,
            self.bw_h_range.1,
            self.bw_g_range.0,
            self.bw_g_range.1,
        ));
        if let Some(t) = self.threads {
            s.push_str(&format!("threads={t}\n"));
        }
        // the bandwidths line switches the rule to fixed; restore LCV if set
        if self.bandwidths.is_some() && self.bandwidth_rule == BandwidthRule::Lcv {
            s.push_str("bandwidth_rule=LCV\n");
        }
        s
    }
}

fn parse_config(text: &str) -> SimResult<Vec<(String, String)>> {
    parse_key_values(text).map_err(|e| SimError::Usage(e.to_string()))
}

fn parse_one<T: FromStr>(key: &str, value: &str) -> SimResult<T> {
    value.trim().parse().map_err(|_| SimError::Usage(format!("`{key}` has invalid value `{value}`")))
}

pub fn parse_list<T: FromStr>(key: &str, value: &str) -> SimResult<Vec<T>> {
    let v: Vec<T> = value.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_one(key, s)).collect::<SimResult<_>>()?;
    if v.is_empty() {
        return Err(SimError::Usage(format!("`{key}` needs at least one value")));
    }
    Ok(v)
}

pub fn parse_pair(key: &str, value: &str) -> SimResult<(f64, f64)> {
    match parse_list::<f64>(key, value)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(SimError::Usage(format!("`{key}` expects two comma-separated numbers, got `{value}`"))),
    }
}
