//! `phi(h, g)`, the bias-driven variance term of the ISE limit, for
//! diagnosing which regime a bandwidth pair occupies.

use crate::error::{Error, Result};
use crate::kde::Bandwidths;
use crate::kernel::KernelPair;
use crate::models::JointModel;
use crate::special::constants::kernel_constants;
use crate::special::grid::{LineNodes, QuadratureGrid, Support};

const PHI_CIRCLE_NODES: usize = 256;
const PHI_LINE_NODES: usize = 256;
const HESSIAN_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiDiagnostics {
    /// Variance of the directional Hessian trace under the model.
    pub sigma_x_sq: f64,
    /// Variance of the second-coordinate second derivative.
    pub sigma_z_sq: f64,
    pub sigma_xz: f64,
    pub phi: f64,
}

fn second_difference(f: impl Fn(f64) -> f64, x: f64, e: f64) -> f64 {
    (f(x + e) - 2.0 * f(x) + f(x - e)) / (e * e)
}

/// Quadrature of the squared Hessian terms against the model density. On the
/// torus the second factor's kernel moment is `2 b_1(L)`.
pub fn compute_phi(model: &JointModel, bw: &Bandwidths, kernel: &KernelPair) -> Result<PhiDiagnostics> {
    let support = model.support();
    let grid = match support {
        Support::CircleCircle => QuadratureGrid::circle_circle(PHI_CIRCLE_NODES, PHI_CIRCLE_NODES),
        Support::CircleLine => {
            let (lo, hi) = model
                .linear_range()
                .ok_or_else(|| Error::Domain("model has no linear coordinate".into()))?;
            QuadratureGrid::circle_line(PHI_CIRCLE_NODES, LineNodes::interval(PHI_LINE_NODES, lo, hi)?)
        }
        Support::SphereLine => return Err(Error::UnsupportedDimension(2)),
    };
    let kc = kernel_constants(kernel, 1, bw.h)?;
    let c1 = 2.0 * kc.b_q;
    let c2 = if support == Support::CircleCircle { 2.0 * kc.b_q } else { kc.mu2_k };
    let e = HESSIAN_STEP;
    let (mut m_x, mut m_z, mut m_xx, mut m_zz, mut m_xz) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut bad = None;
    grid.for_each(|i, j, p, w| {
        let t = p.theta();
        let b = match support {
            Support::CircleCircle => p.psi(),
            _ => p.z(),
        };
        let f = model.pdf(t, b);
        let hx = second_difference(|s| model.pdf(s, b), t, e);
        let hz = second_difference(|s| model.pdf(t, s), b, e);
        if !(hx.is_finite() && hz.is_finite() && f.is_finite()) {
            bad.get_or_insert((i, j));
            return;
        }
        let wf = w * f;
        m_x += wf * hx;
        m_z += wf * hz;
        m_xx += wf * hx * hx;
        m_zz += wf * hz * hz;
        m_xz += wf * hx * hz;
    });
    if let Some((i, j)) = bad {
        return Err(Error::NonFinite { index: i * grid.second_len() + j, location: format!("Hessian at node ({i}, {j})") });
    }
    let sigma_x_sq = (m_xx - m_x * m_x).max(0.0);
    let sigma_z_sq = (m_zz - m_z * m_z).max(0.0);
    let sigma_xz = m_xz - m_x * m_z;
    let (h2, g2) = (bw.h * bw.h, bw.g * bw.g);
    let phi = c1 * c1 * sigma_x_sq * h2 * h2 + c2 * c2 * sigma_z_sq * g2 * g2 + 2.0 * c1 * c2 * sigma_xz * h2 * g2;
    Ok(PhiDiagnostics { sigma_x_sq, sigma_z_sq, sigma_xz, phi })
}
