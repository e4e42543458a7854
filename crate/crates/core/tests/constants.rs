use std::f64::consts::PI;

use dirlin::kernel::KernelPair;
use dirlin::special::{sigma_sq_kernel_factor, vmf_squared_norm, LineNodes, QuadratureGrid};

#[test]
fn directional_variance_factor_circle() {
    let f = sigma_sq_kernel_factor(&KernelPair::default(), 1).unwrap();
    assert!((f.directional - (8.0 * PI).powf(-0.5)).abs() < 1e-6, "{}", f.directional);
    assert!((f.linear - (8.0 * PI).powf(-0.5)).abs() < 1e-8, "{}", f.linear);
}

#[test]
fn directional_variance_factor_sphere() {
    let f = sigma_sq_kernel_factor(&KernelPair::default(), 2).unwrap();
    assert!((f.directional - 1.0 / (8.0 * PI)).abs() < 1e-6, "{}", f.directional);
}

#[test]
fn roughness_product_on_circle_line_grid() {
    let line = LineNodes::centered(128, 0.0, 1.0, 7.0).unwrap();
    let grid = QuadratureGrid::circle_line(256, line);
    let i0 = dirlin::special::bessel_i(0.0, 1.0).unwrap().value;
    let v = grid
        .integrate(|p| {
            let fx = p.theta().cos().exp() / (2.0 * PI * i0);
            let z = p.z();
            let fz = (-0.5 * z * z).exp() / (2.0 * PI).sqrt();
            (fx * fz).powi(2)
        })
        .unwrap();
    let expected = vmf_squared_norm(1.0, 1).unwrap() * 0.5 / PI.sqrt();
    assert!((v - expected).abs() < 1e-10, "{v} vs {expected}");
}
