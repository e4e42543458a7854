//! Product quadrature grids over `circle x line`, `sphere x line` and
//! `circle x circle`.
//!
//! Circle factors use the uniform trapezoid rule, which is spectrally
//! accurate for periodic integrands. The 2-sphere uses Gauss–Legendre in the
//! cosine of the colatitude times a uniform longitude rule. Line factors use
//! Gauss–Legendre on `[c - T s, c + T s]`.

use std::f64::consts::PI;
use std::fmt;

use super::quadrature::gauss_legendre_on;
use crate::error::{Error, Result};

pub const DEFAULT_CIRCLE_NODES: usize = 256;
pub const DEFAULT_SPHERE_NODES: (usize, usize) = (64, 128);
pub const DEFAULT_LINE_NODES: usize = 128;
pub const DEFAULT_TRUNCATION: f64 = 7.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Support {
    CircleLine,
    SphereLine,
    CircleCircle,
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Support::CircleLine => "circle-line",
            Support::SphereLine => "sphere-line",
            Support::CircleCircle => "circle-circle",
        };
        f.write_str(s)
    }
}

/// Nodes on a sphere factor, stored as flat unit vectors of length `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalNodes {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
    /// Angles of the nodes when the factor is the circle.
    angles: Option<Vec<f64>>,
}

impl DirectionalNodes {
    pub fn circle(n: usize) -> Self {
        let step = 2.0 * PI / n as f64;
        let angles: Vec<f64> = (0..n).map(|k| k as f64 * step).collect();
        let points = angles.iter().flat_map(|&a| [a.cos(), a.sin()]).collect();
        Self { dim: 2, points, weights: vec![step; n], angles: Some(angles) }
    }

    pub fn sphere(n_colat: usize, n_lon: usize) -> Self {
        let (t, wt) = gauss_legendre_on(n_colat, -1.0, 1.0);
        let step = 2.0 * PI / n_lon as f64;
        let mut points = Vec::with_capacity(3 * n_colat * n_lon);
        let mut weights = Vec::with_capacity(n_colat * n_lon);
        for (&c, &w) in t.iter().zip(&wt) {
            let s = (1.0 - c * c).max(0.0).sqrt();
            for k in 0..n_lon {
                let phi = (k as f64 + 0.5) * step;
                points.extend_from_slice(&[s * phi.cos(), s * phi.sin(), c]);
                weights.push(w * step);
            }
        }
        Self { dim: 3, points, weights, angles: None }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Ambient dimension `q + 1`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn angles(&self) -> Option<&[f64]> {
        self.angles.as_deref()
    }
}

/// Gauss–Legendre nodes on a truncated line factor.
#[derive(Debug, Clone, PartialEq)]
pub struct LineNodes {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    lower: f64,
    upper: f64,
}

impl LineNodes {
    /// Nodes on `[center - truncation * scale, center + truncation * scale]`.
    pub fn centered(n: usize, center: f64, scale: f64, truncation: f64) -> Result<Self> {
        if !(scale > 0.0) || !(truncation > 0.0) || !center.is_finite() {
            return Err(Error::Domain(format!(
                "line factor needs positive scale and truncation (center {center}, scale {scale}, T {truncation})"
            )));
        }
        Self::interval(n, center - truncation * scale, center + truncation * scale)
    }

    pub fn interval(n: usize, lower: f64, upper: f64) -> Result<Self> {
        if !(upper > lower) || n == 0 {
            return Err(Error::Domain(format!("invalid line interval [{lower}, {upper}] with {n} nodes")));
        }
        let (nodes, weights) = gauss_legendre_on(n, lower, upper);
        Ok(Self { nodes, weights, lower, upper })
    }

    /// Uniform nodes with trapezoid weights on `[lower, upper]`.
    pub fn uniform(n: usize, lower: f64, upper: f64) -> Result<Self> {
        if !(upper > lower) || n < 2 {
            return Err(Error::Domain(format!("invalid uniform line [{lower}, {upper}] with {n} nodes")));
        }
        let step = (upper - lower) / (n - 1) as f64;
        let nodes = (0..n).map(|k| lower + k as f64 * step).collect();
        let mut weights = vec![step; n];
        weights[0] *= 0.5;
        weights[n - 1] *= 0.5;
        Ok(Self { nodes, weights, lower, upper })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SecondFactor {
    Line(LineNodes),
    Directional(DirectionalNodes),
}

/// Second coordinate of a grid node.
#[derive(Debug, Clone, Copy)]
pub enum SecondCoord<'a> {
    Line(f64),
    Direction(&'a [f64]),
}

/// A node of a product grid, handed to integrands.
#[derive(Debug, Clone, Copy)]
pub struct GridPoint<'a> {
    pub x: &'a [f64],
    pub second: SecondCoord<'a>,
}

impl GridPoint<'_> {
    /// Angle of the first (circular) coordinate in `[0, 2pi)`.
    pub fn theta(&self) -> f64 {
        self.x[1].atan2(self.x[0]).rem_euclid(2.0 * PI)
    }

    /// Linear coordinate; panics on a directional second factor.
    pub fn z(&self) -> f64 {
        match self.second {
            SecondCoord::Line(z) => z,
            SecondCoord::Direction(_) => panic!("grid point has no linear coordinate"),
        }
    }

    /// Angle of the second (circular) coordinate in `[0, 2pi)`.
    pub fn psi(&self) -> f64 {
        match self.second {
            SecondCoord::Direction(y) => y[1].atan2(y[0]).rem_euclid(2.0 * PI),
            SecondCoord::Line(_) => panic!("grid point has no second direction"),
        }
    }
}

/// Product quadrature grid; node `(i, j)` has weight `w1[i] * w2[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    support: Support,
    first: DirectionalNodes,
    second: SecondFactor,
}

impl QuadratureGrid {
    /// Grid from explicit factors; the support must agree with them.
    pub fn from_factors(first: DirectionalNodes, second: SecondFactor) -> Result<Self> {
        let support = match (&second, first.dim()) {
            (SecondFactor::Line(_), 2) => Support::CircleLine,
            (SecondFactor::Line(_), 3) => Support::SphereLine,
            (SecondFactor::Directional(d), 2) if d.dim() == 2 => Support::CircleCircle,
            _ => {
                return Err(Error::Domain(format!(
                    "no supported product space with a first factor in R^{}",
                    first.dim()
                )))
            }
        };
        Ok(Self { support, first, second })
    }

    pub fn circle_line(n_circle: usize, line: LineNodes) -> Self {
        Self { support: Support::CircleLine, first: DirectionalNodes::circle(n_circle), second: SecondFactor::Line(line) }
    }

    pub fn sphere_line(n_colat: usize, n_lon: usize, line: LineNodes) -> Self {
        Self {
            support: Support::SphereLine,
            first: DirectionalNodes::sphere(n_colat, n_lon),
            second: SecondFactor::Line(line),
        }
    }

    pub fn circle_circle(n_first: usize, n_second: usize) -> Self {
        Self {
            support: Support::CircleCircle,
            first: DirectionalNodes::circle(n_first),
            second: SecondFactor::Directional(DirectionalNodes::circle(n_second)),
        }
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn first(&self) -> &DirectionalNodes {
        &self.first
    }

    pub fn second(&self) -> &SecondFactor {
        &self.second
    }

    pub fn line(&self) -> Option<&LineNodes> {
        match &self.second {
            SecondFactor::Line(l) => Some(l),
            SecondFactor::Directional(_) => None,
        }
    }

    pub fn second_directional(&self) -> Option<&DirectionalNodes> {
        match &self.second {
            SecondFactor::Directional(d) => Some(d),
            SecondFactor::Line(_) => None,
        }
    }

    pub fn second_len(&self) -> usize {
        match &self.second {
            SecondFactor::Line(l) => l.len(),
            SecondFactor::Directional(d) => d.len(),
        }
    }

    pub fn second_weights(&self) -> &[f64] {
        match &self.second {
            SecondFactor::Line(l) => l.weights(),
            SecondFactor::Directional(d) => d.weights(),
        }
    }

    pub fn len(&self) -> usize {
        self.first.len() * self.second_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Shape `(first, second)` of the node matrix.
    pub fn shape(&self) -> (usize, usize) {
        (self.first.len(), self.second_len())
    }

    pub fn point(&self, i: usize, j: usize) -> GridPoint<'_> {
        let second = match &self.second {
            SecondFactor::Line(l) => SecondCoord::Line(l.nodes()[j]),
            SecondFactor::Directional(d) => SecondCoord::Direction(d.point(j)),
        };
        GridPoint { x: self.first.point(i), second }
    }

    /// Visits every node in row-major `(first, second)` order.
    pub fn for_each<F: FnMut(usize, usize, GridPoint<'_>, f64)>(&self, mut f: F) {
        let w2 = self.second_weights();
        for i in 0..self.first.len() {
            let w1 = self.first.weights()[i];
            for (j, &wj) in w2.iter().enumerate() {
                f(i, j, self.point(i, j), w1 * wj);
            }
        }
    }

    /// Evaluates `f` on every node, row-major.
    pub fn tabulate<F: Fn(&GridPoint<'_>) -> f64>(&self, f: F) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        self.for_each(|_, _, p, _| out.push(f(&p)));
        out
    }

    /// `sum_i w_i f(node_i)`, rejecting non-finite integrand values.
    pub fn integrate<F: Fn(&GridPoint<'_>) -> f64>(&self, f: F) -> Result<f64> {
        let mut acc = NeumaierSum::default();
        let mut failure = None;
        self.for_each(|i, j, p, w| {
            if failure.is_some() {
                return;
            }
            let v = f(&p);
            if !v.is_finite() {
                failure = Some(Error::NonFinite {
                    index: i * self.second_len() + j,
                    location: describe(&p),
                });
                return;
            }
            acc.add(w * v);
        });
        match failure {
            Some(e) => Err(e),
            None => Ok(acc.sum()),
        }
    }

    /// Weighted sum of values already tabulated on the grid (row-major).
    pub fn integrate_values(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.len() {
            return Err(Error::Domain(format!("expected {} grid values, got {}", self.len(), values.len())));
        }
        let w2 = self.second_weights();
        let m = w2.len();
        let mut acc = NeumaierSum::default();
        for (i, &w1) in self.first.weights().iter().enumerate() {
            let row = &values[i * m..(i + 1) * m];
            let mut r = NeumaierSum::default();
            for (k, (&v, &w)) in row.iter().zip(w2).enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite { index: i * m + k, location: describe(&self.point(i, k)) });
                }
                r.add(v * w);
            }
            acc.add(w1 * r.sum());
        }
        Ok(acc.sum())
    }
}

fn describe(p: &GridPoint<'_>) -> String {
    match p.second {
        SecondCoord::Line(z) => format!("x = {:?}, z = {z}", p.x),
        SecondCoord::Direction(y) => format!("x = {:?}, y = {y:?}", p.x),
    }
}

/// Neumaier compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn sum(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::default();
        for v in iter {
            s.add(v);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_and_sphere_weights() {
        let c = DirectionalNodes::circle(256);
        assert!((c.weights().iter().sum::<f64>() - 2.0 * PI).abs() < 1e-10);
        let s = DirectionalNodes::sphere(64, 128);
        assert!((s.weights().iter().sum::<f64>() - 4.0 * PI).abs() < 1e-8);
        for i in 0..s.len() {
            let p = s.point(i);
            assert!(((p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn truncated_line_keeps_normal_mass() {
        let line = LineNodes::centered(128, 0.0, 1.0, 6.0).unwrap();
        let m: f64 = line
            .nodes()
            .iter()
            .zip(line.weights())
            .map(|(&z, &w)| w * (-0.5 * z * z).exp() / (2.0 * PI).sqrt())
            .sum();
        assert!(m >= 1.0 - 1e-8, "mass {m}");
    }

    #[test]
    fn non_finite_value_names_node() {
        let g = QuadratureGrid::circle_circle(8, 8);
        let err = g.integrate(|p| if p.theta() > 3.0 { f64::NAN } else { 1.0 }).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
        assert!(err.to_string().contains("node"));
    }

    #[test]
    fn torus_constant_integrates_to_area() {
        let g = QuadratureGrid::circle_circle(32, 16);
        let v = g.integrate(|_| 1.0).unwrap();
        assert!((v - 4.0 * PI * PI).abs() < 1e-10);
    }
}
