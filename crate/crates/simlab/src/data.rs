//! CSV ingestion of circular-linear (`theta,z`) and circular-circular
//! (`theta,psi`) observations.

use std::f64::consts::TAU;
use std::path::Path;

use dirlin::models::JointSample;
use dirlin::special::Support;

use crate::error::{SimError, SimResult};
use crate::output::fmt_f64;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub sample: JointSample,
    pub header: bool,
    pub warnings: Vec<String>,
}

fn parse_error(line: u64, message: String) -> SimError {
    dirlin::Error::Parse { line: line as usize, message }.into()
}

fn support_from_header(second: &str) -> Option<Support> {
    match second.trim().to_ascii_lowercase().as_str() {
        "z" => Some(Support::CircleLine),
        "psi" => Some(Support::CircleCircle),
        _ => None,
    }
}

fn wrap(v: f64, wrapped: &mut usize) -> f64 {
    if (0.0..TAU).contains(&v) {
        v
    } else {
        *wrapped += 1;
        v.rem_euclid(TAU)
    }
}

/// Parses CSV text. A first row with no numeric field is a header and must
/// name the columns `theta,z` or `theta,psi`; the header decides the support
/// and must agree with `expected`. Angles are converted from degrees when
/// asked, then wrapped into `[0, 2 pi)`.
pub fn parse_dataset(text: &str, expected: Support, degrees: bool) -> SimResult<Dataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut theta = Vec::new();
    let mut second = Vec::new();
    let mut header = false;
    let mut support = expected;
    let to_rad = |v: f64| if degrees { v.to_radians() } else { v };
    for (k, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_error(line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(k as u64 + 1);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        if rec.len() != 2 {
            return Err(parse_error(line, format!("expected 2 fields, found {}", rec.len())));
        }
        let parsed: Vec<Option<f64>> = rec.iter().map(|f| f.parse::<f64>().ok()).collect();
        if k == 0 && parsed.iter().all(Option::is_none) {
            if !rec[0].eq_ignore_ascii_case("theta") {
                return Err(parse_error(line, format!("first column must be `theta`, found `{}`", &rec[0])));
            }
            support = support_from_header(&rec[1])
                .ok_or_else(|| parse_error(line, format!("second column must be `z` or `psi`, found `{}`", &rec[1])))?;
            header = true;
            if support != expected {
                return Err(dirlin::Error::SupportMismatch {
                    expected: format!("{expected} data"),
                    found: format!("{support} data (column `{}`)", &rec[1]),
                }
                .into());
            }
            continue;
        }
        for (i, p) in parsed.iter().enumerate() {
            match p {
                Some(v) if v.is_finite() => {}
                Some(v) => return Err(parse_error(line, format!("field {} is not finite ({v})", i + 1))),
                None => return Err(parse_error(line, format!("field {} `{}` is not a number", i + 1, &rec[i]))),
            }
        }
        theta.push(to_rad(parsed[0].unwrap()));
        let b = parsed[1].unwrap();
        second.push(if support == Support::CircleCircle { to_rad(b) } else { b });
    }
    if theta.is_empty() {
        return Err(dirlin::Error::EmptySample.into());
    }
    let mut wrapped = 0;
    for t in theta.iter_mut() {
        *t = wrap(*t, &mut wrapped);
    }
    if support == Support::CircleCircle {
        for p in second.iter_mut() {
            *p = wrap(*p, &mut wrapped);
        }
    }
    let mut warnings = Vec::new();
    if wrapped > 0 {
        warnings.push(format!("{wrapped} angle(s) outside [0, 2pi) were wrapped"));
    }
    let sample = JointSample::from_pairs(support, &theta, &second)?;
    Ok(Dataset { sample, header, warnings })
}

pub fn read_dataset(path: &Path, expected: Support, degrees: bool) -> SimResult<Dataset> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SimError::Data(format!("cannot read {}: {e}", path.display())))?;
    parse_dataset(&text, expected, degrees)
}

/// Writes a sample with its schema header.
pub fn write_dataset(path: &Path, sample: &JointSample) -> SimResult<()> {
    std::fs::write(path, dataset_text(sample))?;
    Ok(())
}

pub fn dataset_text(sample: &JointSample) -> String {
    let name = if sample.support() == Support::CircleCircle { "psi" } else { "z" };
    let mut s = format!("theta,{name}\n");
    for (t, b) in sample.theta().iter().zip(sample.second()) {
        s.push_str(&format!("{},{}\n", fmt_f64(*t), fmt_f64(b)));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_detection_and_wrapping() {
        let d = parse_dataset("theta,z\n0.5,1\n7.0,2\n-1,3\n", Support::CircleLine, false).unwrap();
        assert!(d.header);
        assert_eq!(d.sample.len(), 3);
        assert_eq!(d.warnings.len(), 1);
        assert!(d.sample.theta().iter().all(|t| (0.0..TAU).contains(t)));
        let d = parse_dataset("0.5,1\n1.0,2\n", Support::CircleLine, false).unwrap();
        assert!(!d.header);
    }

    #[test]
    fn degrees_are_converted() {
        let d = parse_dataset("theta,psi\n180,90\n", Support::CircleCircle, true).unwrap();
        assert!((d.sample.theta()[0] - std::f64::consts::PI).abs() < 1e-15);
        assert!((d.sample.second()[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn bad_field_names_its_line() {
        let e = parse_dataset("theta,z\n0.5,1\n0.7,abc\n", Support::CircleLine, false).unwrap_err();
        assert!(matches!(e, SimError::Data(_)));
        assert!(e.to_string().contains("line 3"), "{e}");
    }

    #[test]
    fn torus_header_against_cylinder_family() {
        let e = parse_dataset("theta,psi\n0.5,1\n", Support::CircleLine, false).unwrap_err();
        assert!(e.to_string().contains("support") || e.to_string().contains("mismatch"), "{e}");
    }

    #[test]
    fn round_trip() {
        let s = JointSample::from_pairs(Support::CircleLine, &[0.1, 6.2], &[-3.5, 1e-300]).unwrap();
        let d = parse_dataset(&dataset_text(&s), Support::CircleLine, false).unwrap();
        assert_eq!(d.sample.second(), s.second());
        for (a, b) in d.sample.theta().iter().zip(s.theta()) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
