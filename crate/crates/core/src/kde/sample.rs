use crate::error::{Error, Result};

/// Tolerance on `| |x| - 1 |` for directional observations.
pub const UNIT_NORM_TOL: f64 = 1e-12;
/// Smallest admissible directional bandwidth (`kappa <= 10^4` for von Mises).
pub const BANDWIDTH_FLOOR: f64 = 0.01;

/// Unit vectors in `R^{q+1}`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Directions {
    dim: usize,
    data: Vec<f64>,
}

impl Directions {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::UnsupportedDimension(dim.saturating_sub(1)));
        }
        if data.len() % dim != 0 {
            return Err(Error::Domain(format!("{} coordinates do not form vectors of length {dim}", data.len())));
        }
        for (i, v) in data.chunks(dim).enumerate() {
            if v.iter().any(|c| !c.is_finite()) {
                return Err(Error::Domain(format!("direction {i} has a non-finite coordinate")));
            }
            let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::Domain(format!("direction {i} has norm {norm}, expected 1")));
            }
        }
        Ok(Self { dim, data })
    }

    /// Normalizes each vector before validation.
    pub fn normalized(dim: usize, mut data: Vec<f64>) -> Result<Self> {
        if dim >= 1 {
            for v in data.chunks_mut(dim) {
                let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                if norm > 0.0 {
                    v.iter_mut().for_each(|c| *c /= norm);
                }
            }
        }
        Self::new(dim, data)
    }

    pub fn from_angles(theta: &[f64]) -> Self {
        let data = theta.iter().flat_map(|&t| [t.cos(), t.sin()]).collect();
        Self { dim: 2, data }
    }

    /// Ambient dimension `q + 1`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn q(&self) -> usize {
        self.dim - 1
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.dim)
    }

    /// Angles in `[0, 2pi)`; `None` unless the vectors lie on the circle.
    pub fn angles(&self) -> Option<Vec<f64>> {
        (self.dim == 2).then(|| self.iter().map(|v| v[1].atan2(v[0]).rem_euclid(std::f64::consts::TAU)).collect())
    }

    /// Applies the row-major `dim x dim` matrix `r` to every vector.
    pub fn rotated(&self, r: &[f64]) -> Self {
        let d = self.dim;
        assert_eq!(r.len(), d * d, "rotation matrix has wrong size");
        let mut data = Vec::with_capacity(self.data.len());
        for v in self.iter() {
            for row in r.chunks(d) {
                data.push(row.iter().zip(v).map(|(a, b)| a * b).sum());
            }
        }
        Self { dim: d, data }
    }

    pub fn select(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            data.extend_from_slice(self.get(i));
        }
        Self { dim: self.dim, data }
    }

    pub fn concat(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Self { dim: self.dim, data }
    }
}

/// A unit vector on `S^q` paired with a real value.
#[derive(Debug, Clone, PartialEq)]
pub struct DirLinObservation {
    pub x: Vec<f64>,
    pub z: f64,
}

impl DirLinObservation {
    pub fn new(x: Vec<f64>, z: f64) -> Result<Self> {
        let norm = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_NORM_TOL || !z.is_finite() {
            return Err(Error::Domain(format!("observation needs a unit vector and finite z (norm {norm}, z {z})")));
        }
        Ok(Self { x, z })
    }
}

/// A pair of unit vectors on `S^{q1} x S^{q2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirDirObservation {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Directional-linear sample in flat storage.
#[derive(Debug, Clone, PartialEq)]
pub struct DirLinSample {
    x: Directions,
    z: Vec<f64>,
}

impl DirLinSample {
    pub fn new(x: Directions, z: Vec<f64>) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::Domain(format!("{} directions but {} linear values", x.len(), z.len())));
        }
        if z.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(i) = z.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("linear value {i} is not finite")));
        }
        Ok(Self { x, z })
    }

    pub fn from_angles(theta: &[f64], z: &[f64]) -> Result<Self> {
        Self::new(Directions::from_angles(theta), z.to_vec())
    }

    pub fn from_observations(obs: &[DirLinObservation]) -> Result<Self> {
        let first = obs.first().ok_or(Error::EmptySample)?;
        let dim = first.x.len();
        let data = obs.iter().flat_map(|o| o.x.iter().copied()).collect();
        Self::new(Directions::new(dim, data)?, obs.iter().map(|o| o.z).collect())
    }

    pub fn directions(&self) -> &Directions {
        &self.x
    }

    pub fn linear(&self) -> &[f64] {
        &self.z
    }

    pub fn q(&self) -> usize {
        self.x.q()
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn angles(&self) -> Option<Vec<f64>> {
        self.x.angles()
    }

    pub fn observation(&self, i: usize) -> DirLinObservation {
        DirLinObservation { x: self.x.get(i).to_vec(), z: self.z[i] }
    }

    /// The sample with linear values re-paired as `z[perm[i]]`.
    pub fn with_linear_permuted(&self, perm: &[usize]) -> Self {
        Self { x: self.x.clone(), z: perm.iter().map(|&j| self.z[j]).collect() }
    }

    pub fn select(&self, idx: &[usize]) -> Self {
        Self { x: self.x.select(idx), z: idx.iter().map(|&i| self.z[i]).collect() }
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut z = self.z.clone();
        z.extend_from_slice(&other.z);
        Self { x: self.x.concat(&other.x), z }
    }
}

/// Directional-directional sample in flat storage.
#[derive(Debug, Clone, PartialEq)]
pub struct DirDirSample {
    x: Directions,
    y: Directions,
}

impl DirDirSample {
    pub fn new(x: Directions, y: Directions) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Domain(format!("{} first directions but {} second", x.len(), y.len())));
        }
        if x.is_empty() {
            return Err(Error::EmptySample);
        }
        Ok(Self { x, y })
    }

    pub fn from_angles(theta: &[f64], psi: &[f64]) -> Result<Self> {
        Self::new(Directions::from_angles(theta), Directions::from_angles(psi))
    }

    pub fn first(&self) -> &Directions {
        &self.x
    }

    pub fn second(&self) -> &Directions {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn observation(&self, i: usize) -> DirDirObservation {
        DirDirObservation { x: self.x.get(i).to_vec(), y: self.y.get(i).to_vec() }
    }

    pub fn with_second_permuted(&self, perm: &[usize]) -> Self {
        Self { x: self.x.clone(), y: self.y.select(perm) }
    }

    pub fn select(&self, idx: &[usize]) -> Self {
        Self { x: self.x.select(idx), y: self.y.select(idx) }
    }

    pub fn concat(&self, other: &Self) -> Self {
        Self { x: self.x.concat(&other.x), y: self.y.concat(&other.y) }
    }
}

/// Bandwidth pair: `(h, g)` for directional-linear data, `(h1, h2)` for
/// directional-directional data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bandwidths {
    pub h: f64,
    pub g: f64,
}

impl Bandwidths {
    pub fn new(h: f64, g: f64) -> Result<Self> {
        let b = Self { h, g };
        b.check_dirlin()?;
        Ok(b)
    }

    pub fn dirdir(h1: f64, h2: f64) -> Result<Self> {
        let b = Self { h: h1, g: h2 };
        b.check_dirdir()?;
        Ok(b)
    }

    pub fn check_dirlin(&self) -> Result<()> {
        check_directional(self.h)?;
        if !(self.g > 0.0) || !self.g.is_finite() {
            return Err(Error::InvalidBandwidth(format!("g must be positive and finite, got {}", self.g)));
        }
        Ok(())
    }

    pub fn check_dirdir(&self) -> Result<()> {
        check_directional(self.h)?;
        check_directional(self.g)
    }
}

pub(crate) fn check_directional(h: f64) -> Result<()> {
    if !h.is_finite() || !(h > 0.0) {
        return Err(Error::InvalidBandwidth(format!("directional bandwidth must be positive and finite, got {h}")));
    }
    if h < BANDWIDTH_FLOOR {
        return Err(Error::BandwidthBelowFloor { value: h, floor: BANDWIDTH_FLOOR });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_unit_vectors() {
        assert!(Directions::new(2, vec![1.0, 0.1]).is_err());
        assert!(Directions::normalized(2, vec![3.0, 4.0]).is_ok());
        assert!(DirLinObservation::new(vec![0.0, 1.0], f64::NAN).is_err());
    }

    #[test]
    fn floor_is_enforced() {
        assert!(matches!(Bandwidths::new(0.005, 1.0), Err(Error::BandwidthBelowFloor { .. })));
        assert!(Bandwidths::new(0.01, 1e-6).is_ok());
        assert!(Bandwidths::dirdir(0.5, 0.001).is_err());
    }

    #[test]
    fn empty_sample_is_rejected() {
        assert!(matches!(DirLinSample::from_angles(&[], &[]), Err(Error::EmptySample)));
    }

    #[test]
    fn angles_round_trip() {
        let t = [0.1, 3.0, 6.0];
        let d = Directions::from_angles(&t);
        for (a, b) in d.angles().unwrap().iter().zip(t) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
