//! Quadrature evaluations of the kernel constants against their closed
//! forms for the von Mises / normal pair.

use std::f64::consts::PI;
use std::fmt::Write;

use dirlin::kernel::KernelPair;
use dirlin::special::{bessel_i, kernel_constants, sigma_sq_kernel_factor, vmf_squared_norm};

use crate::error::SimResult;

/// Circle nodes of the trapezoidal roughness quadrature.
pub const ROUGHNESS_NODES: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantCheck {
    pub name: String,
    pub value: f64,
    pub reference: f64,
    pub tolerance: f64,
}

impl ConstantCheck {
    fn new(name: &str, value: f64, reference: f64, tolerance: f64) -> Self {
        Self { name: name.to_string(), value, reference, tolerance }
    }

    pub fn abs_error(&self) -> f64 {
        (self.value - self.reference).abs()
    }

    pub fn pass(&self) -> bool {
        self.abs_error() <= self.tolerance
    }
}

/// `int f_vM^2` by the trapezoidal rule, spectrally accurate for periodic
/// integrands.
pub fn vm_roughness_quadrature(kappa: f64, nodes: usize) -> SimResult<f64> {
    let c = 1.0 / (2.0 * PI * bessel_i(0.0, kappa)?.value);
    let step = 2.0 * PI / nodes as f64;
    Ok((0..nodes).map(|i| (c * (kappa * (i as f64 * step).cos()).exp()).powi(2)).sum::<f64>() * step)
}

pub fn run_constants_check() -> SimResult<Vec<ConstantCheck>> {
    let k = KernelPair::default();
    let s1 = sigma_sq_kernel_factor(&k, 1)?;
    let s2 = sigma_sq_kernel_factor(&k, 2)?;
    let r8 = 1.0 / (8.0 * PI).sqrt();
    let i0_1 = bessel_i(0.0, 1.0)?.value;
    let i0_2 = bessel_i(0.0, 2.0)?.value;
    let r_vm = i0_2 / (2.0 * PI * i0_1 * i0_1);
    let mut out = vec![
        ConstantCheck::new("directional factor q=1", s1.directional, r8, 1e-6),
        ConstantCheck::new("directional factor q=2", s2.directional, 1.0 / (8.0 * PI), 1e-6),
        ConstantCheck::new("linear factor", s1.linear, r8, 1e-8),
        ConstantCheck::new("R(f_vM), kappa=1, quadrature", vm_roughness_quadrature(1.0, ROUGHNESS_NODES)?, r_vm, 1e-8),
        ConstantCheck::new("R(f_vM), kappa=1, Bessel form", vmf_squared_norm(1.0, 1)?, r_vm, 1e-12),
    ];
    for q in 1..=2usize {
        let c = kernel_constants(&k, q, 0.5)?;
        let qf = q as f64;
        out.push(ConstantCheck::new(&format!("lambda_{q}(L)"), c.lambda_l, (2.0 * PI).powf(qf / 2.0), 1e-8));
        out.push(ConstantCheck::new(&format!("lambda_{q}(L^2)"), c.lambda_l2, PI.powf(qf / 2.0), 1e-8));
        out.push(ConstantCheck::new(&format!("b_{q}(L)"), c.b_q, qf / 2.0, 1e-8));
        if q == 1 {
            out.push(ConstantCheck::new("mu_2(K)", c.mu2_k, 1.0, 1e-8));
            out.push(ConstantCheck::new("R(K)", c.r_k, 0.5 / PI.sqrt(), 1e-8));
        }
    }
    Ok(out)
}

pub fn constants_table(checks: &[ConstantCheck]) -> String {
    let mut s = format!("{:<32} {:>22} {:>22} {:>10} {:>8} {}\n", "constant", "value", "reference", "abs_err", "tol", "status");
    for c in checks {
        let _ = writeln!(
            s,
            "{:<32} {:>22.16e} {:>22.16e} {:>10.2e} {:>8.0e} {}",
            c.name,
            c.value,
            c.reference,
            c.abs_error(),
            c.tolerance,
            if c.pass() { "PASS" } else { "FAIL" }
        );
    }
    s
}
