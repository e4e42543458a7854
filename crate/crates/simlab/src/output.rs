//! CSV rows with round-trippable floats.

use std::fs;
use std::path::Path;

use dirlin::models::ModelId;

use crate::error::{SimError, SimResult};

/// 17 significant digits, enough to reproduce every `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn parse_f64(s: &str) -> SimResult<f64> {
    s.trim().parse().map_err(|_| SimError::Data(format!("invalid number `{s}`")))
}

/// One (model, n, delta, alpha) cell of a size/power table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub model: ModelId,
    pub n: usize,
    pub delta: f64,
    pub alpha: f64,
    pub rejection_rate: f64,
    /// `sqrt(p (1 - p) / M)`.
    pub mc_se: f64,
    pub m: usize,
    pub elapsed_s: f64,
    pub seed: u64,
    /// More than a tenth of the Monte Carlo replicates had a flagged test.
    pub flagged: bool,
}

pub const RESULT_HEADER: [&str; 10] = ["model", "n", "delta", "alpha", "rejection_rate", "mc_se", "M", "elapsed_s", "seed", "flagged"];

impl ResultRow {
    pub fn new(model: ModelId, n: usize, delta: f64, alpha: f64, rejections: usize, m: usize, seed: u64) -> Self {
        let p = rejections as f64 / m as f64;
        Self { model, n, delta, alpha, rejection_rate: p, mc_se: mc_se(p, m), m, elapsed_s: 0.0, seed, flagged: false }
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.model.to_string(),
            self.n.to_string(),
            fmt_f64(self.delta),
            fmt_f64(self.alpha),
            fmt_f64(self.rejection_rate),
            fmt_f64(self.mc_se),
            self.m.to_string(),
            fmt_f64(self.elapsed_s),
            self.seed.to_string(),
            self.flagged.to_string(),
        ]
    }

    fn from_record(r: &csv::StringRecord, line: usize) -> SimResult<Self> {
        let field = |k: usize| r.get(k).ok_or_else(|| SimError::Data(format!("line {line}: missing column {}", RESULT_HEADER[k])));
        let bad = |k: usize| SimError::Data(format!("line {line}: invalid {}", RESULT_HEADER[k]));
        Ok(Self {
            model: field(0)?.parse().map_err(|_| bad(0))?,
            n: field(1)?.parse().map_err(|_| bad(1))?,
            delta: parse_f64(field(2)?).map_err(|_| bad(2))?,
            alpha: parse_f64(field(3)?).map_err(|_| bad(3))?,
            rejection_rate: parse_f64(field(4)?).map_err(|_| bad(4))?,
            mc_se: parse_f64(field(5)?).map_err(|_| bad(5))?,
            m: field(6)?.parse().map_err(|_| bad(6))?,
            elapsed_s: parse_f64(field(7)?).map_err(|_| bad(7))?,
            seed: field(8)?.parse().map_err(|_| bad(8))?,
            flagged: field(9)?.parse().map_err(|_| bad(9))?,
        })
    }
}

pub fn mc_se(p: f64, m: usize) -> f64 {
    (p * (1.0 - p) / m as f64).sqrt()
}

pub fn write_rows(path: &Path, rows: &[ResultRow]) -> SimResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(RESULT_HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows(path: &Path) -> SimResult<Vec<ResultRow>> {
    let mut rd = csv::Reader::from_path(path)?;
    rd.records().enumerate().map(|(k, r)| ResultRow::from_record(&r?, k + 2)).collect()
}

/// Writes a table with a header; every value is already formatted.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> SimResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn ensure_dir(dir: &Path) -> SimResult<()> {
    fs::create_dir_all(dir).map_err(|e| SimError::Data(format!("cannot create {}: {e}", dir.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt() * 1e-300, -123456.789e10, 0.0] {
            assert_eq!(parse_f64(&fmt_f64(x)).unwrap(), x);
        }
    }

    #[test]
    fn rows_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("rows.csv");
        let mut a = ResultRow::new(ModelId::Cl(1), 100, 0.15, 0.05, 13, 200, 7);
        a.elapsed_s = 1.0 / 7.0;
        let mut b = ResultRow::new(ModelId::Cc(10), 500, 0.0, 0.1, 0, 1, 8);
        b.flagged = true;
        write_rows(&p, &[a.clone(), b.clone()]).unwrap();
        assert_eq!(read_rows(&p).unwrap(), vec![a, b]);
    }
}
