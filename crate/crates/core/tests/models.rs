use std::f64::consts::{PI, TAU};

use dirlin::hypothesis::classical::{chi_square_test, ks_test, normal_cdf, normal_quantile};
use dirlin::models::{
    make_model, model_from_text, sample_joint, sample_link_copula, CircularDensity, JointModel, JointSample, LinkSign,
    MixtureAlternative, ModelId,
};
use dirlin::rng::stream;
use dirlin::special::grid::{LineNodes, QuadratureGrid, Support};
use dirlin::special::quadrature::{gauss_legendre_on, integrate_adaptive, AdaptiveOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn support_grid(model: &JointModel) -> QuadratureGrid {
    match model.support() {
        Support::CircleCircle => QuadratureGrid::circle_circle(256, 256),
        _ => {
            let (a, b) = model.linear_range().unwrap();
            QuadratureGrid::circle_line(256, LineNodes::interval(600, a, b).unwrap())
        }
    }
}

#[test]
fn catalog_models_integrate_to_one() {
    for id in ModelId::all() {
        let model = make_model(id, &[]).unwrap();
        let grid = support_grid(&model);
        let values = model.tabulate(&grid).unwrap();
        assert!(values.iter().all(|v| *v >= 0.0 && v.is_finite()), "{id}");
        let mass = grid.integrate_values(&values).unwrap();
        assert!((mass - 1.0).abs() < 1e-4, "{id}: mass {mass}");
        // tabulation fast paths agree with pointwise evaluation
        let direct = grid.integrate(|p| model.pdf_at(&p)).unwrap();
        assert!((direct - mass).abs() < 1e-12, "{id}");
    }
}

#[test]
fn parameters_round_trip_through_text() {
    for id in ModelId::all() {
        let model = make_model(id, &[]).unwrap();
        let back = model_from_text(&model.to_text()).unwrap();
        assert_eq!(back.theta(), model.theta(), "{id}");
        assert_eq!(back.param_names(), model.param_names());
        let again = model.with_theta(&model.theta()).unwrap();
        assert_eq!(again, model);
    }
}

#[test]
fn catalog_defaults_and_overrides() {
    let cl1 = make_model(ModelId::Cl(1), &[]).unwrap();
    assert_eq!(cl1.params(), vec![
        ("x.mu".to_string(), 1.5 * PI),
        ("x.kappa".to_string(), 2.0),
        ("z.m".to_string(), 0.0),
        ("z.sigma".to_string(), 1.0)
    ]);
    let cl10 = make_model(ModelId::Cl(10), &[]).unwrap();
    let (t, z) = (1.0, 0.7);
    let exact = (9.0f64 - 4.0).sqrt() / TAU * (-3.0 * z + 2.0 * z * (t - 1.5 * PI).cos()).exp();
    assert!((cl10.pdf(t, z) - exact).abs() < 1e-15);
    assert_eq!(cl10.pdf(t, -0.1), 0.0);
    let cc10 = make_model(ModelId::Cc(10), &[]).unwrap();
    assert_eq!(cc10.theta(), vec![0.0, PI / 6.0, 1.5, 0.25, 0.0]);
    assert!(make_model(ModelId::Cc(12), &[("g.rho", 1.0)]).is_err());
    assert!(make_model(ModelId::Cl(11), &[("alpha", 0.3)]).is_err());
    assert!(make_model(ModelId::Cl(1), &[("nope", 0.3)]).is_err());
    assert!("CL13".parse::<ModelId>().is_err());
    assert!("XX1".parse::<ModelId>().is_err());
}

#[test]
fn cc12_matches_direct_formula() {
    let model = make_model(ModelId::Cc(12), &[]).unwrap();
    let opts = AdaptiveOptions { abs_tol: 1e-14, rel_tol: 1e-13, max_segments: 2000 };
    let vm = |t: f64, mu: f64, k: f64| (k * (t - mu).cos()).exp() / (TAU * bessel_i0(k));
    let (theta, psi) = (0.75 * PI, 0.0);
    let f1 = integrate_adaptive(|t| vm(t, 0.75 * PI, 5.0), 0.0, theta, opts).unwrap();
    let f2 = 0.0; // psi = 0
    let rho: f64 = 0.5;
    let c = (1.0 - rho * rho) / (1.0 + rho * rho - 2.0 * rho * (TAU * (f1 - f2)).cos());
    let expected = c * vm(theta, 0.75 * PI, 5.0) * vm(psi, 0.0, 1.0);
    assert!((model.pdf(theta, psi) - expected).abs() < 1e-10 * expected);
}

/// Power series of I_0, independent of the library's Bessel routines.
fn bessel_i0(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= (x / 2.0) * (x / 2.0) / (k * k) as f64;
        sum += term;
    }
    sum
}

#[test]
fn mixture_alternative_is_affine() {
    for id in [ModelId::Cl(1), ModelId::Cl(12), ModelId::Cc(6)] {
        let base = make_model(id, &[]).unwrap();
        let h0 = MixtureAlternative::for_catalog(base.clone(), 0.0).unwrap();
        let dev = h0.deviation_model().clone();
        for delta in [0.0, 0.1, 0.15, 1.0] {
            let alt = MixtureAlternative::for_catalog(base.clone(), delta).unwrap();
            for &(t, b) in &[(0.3, 0.5), (4.0, 1.2), (PI, 2.5)] {
                let expected = (1.0 - delta) * h0.pdf(t, b) + delta * dev.pdf(t, b);
                assert!((alt.pdf(t, b) - expected).abs() < 1e-14);
            }
            let grid = support_grid(&base);
            let mass = grid.integrate_values(&alt.tabulate(&grid).unwrap()).unwrap();
            assert!((mass - 1.0).abs() < 1e-4, "{id} delta={delta}: {mass}");
        }
    }
    let cl1 = make_model(ModelId::Cl(1), &[]).unwrap();
    assert!(MixtureAlternative::new(cl1, 0.1, dirlin::models::Deviation::Delta3).is_err());
}

#[test]
fn zero_delta_alternative_reproduces_base_draws() {
    let base = make_model(ModelId::Cl(1), &[]).unwrap();
    let alt = MixtureAlternative::for_catalog(base.clone(), 0.0).unwrap();
    let a = sample_joint(&base, 500, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    let b = alt.sample(500, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn cl1_sample_moments() {
    let model = make_model(ModelId::Cl(1), &[]).unwrap();
    let s = sample_joint(&model, 10_000, &mut stream(1, &[1])).unwrap();
    let theta = s.theta();
    let (c, sn) = theta.iter().fold((0.0, 0.0), |(c, s), t| (c + t.cos(), s + t.sin()));
    let mean_dir = sn.atan2(c).rem_euclid(TAU);
    assert!((mean_dir - 1.5 * PI).abs() < 0.05);
    let z = s.second();
    assert!((z.iter().sum::<f64>() / z.len() as f64).abs() < 0.05);
}

#[test]
fn wrapped_cauchy_mean_direction() {
    let d = CircularDensity::wrapped_cauchy(1.5 * PI, 0.75).unwrap();
    let mut rng = stream(2, &[]);
    let (mut c, mut s) = (0.0, 0.0);
    for _ in 0..100_000 {
        let t = d.sample(&mut rng);
        c += t.cos();
        s += t.sin();
    }
    assert!((s.atan2(c).rem_euclid(TAU) - 1.5 * PI).abs() < 0.02);
}

#[test]
fn uniform_sampler_passes_ks() {
    let d = CircularDensity::uniform();
    let x = d.sample_n(10_000, &mut stream(3, &[]));
    assert!(ks_test(&x, |t| t / TAU).p_value > 0.01);
}

#[test]
fn link_copula_marginals_and_density() {
    let g = CircularDensity::von_mises(PI, 7.0).unwrap();
    for sign in [LinkSign::Plus, LinkSign::Minus] {
        let pairs = sample_link_copula(&g, sign, 100_000, &mut stream(4, &[sign as u64]));
        let u: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let v: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        assert!(ks_test(&u, |x| x).p_value > 0.01);
        assert!(ks_test(&v, |x| x).p_value > 0.01);
        let k = 10;
        let mut counts = vec![0u64; k * k];
        for &(a, b) in &pairs {
            counts[((a * k as f64) as usize).min(k - 1) * k + ((b * k as f64) as usize).min(k - 1)] += 1;
        }
        let (gx, gw) = gauss_legendre_on(16, 0.0, 1.0 / k as f64);
        let mut probs = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                let mut p = 0.0;
                for (x, wx) in gx.iter().zip(&gw) {
                    for (y, wy) in gx.iter().zip(&gw) {
                        let uu = i as f64 / k as f64 + x;
                        let vv = j as f64 / k as f64 + y;
                        p += wx * wy * TAU * g.pdf(TAU * (uu + sign.value() * vv));
                    }
                }
                probs[i * k + j] = p;
            }
        }
        let r = chi_square_test(&counts, &probs, 5.0);
        assert!(r.p_value > 0.01, "{sign:?}: {r:?}");
    }
}

/// Monotone map of the second coordinate to [0, 1] with its derivative.
struct Transform {
    positive: bool,
    loc: f64,
    scale: f64,
}

impl Transform {
    fn pilot(sample: &JointSample, support: Support) -> Option<Self> {
        if support == Support::CircleCircle {
            return None;
        }
        let z = sample.second();
        let positive = z.iter().all(|&v| v > 0.0);
        let w: Vec<f64> = z.iter().map(|&v| if positive { v.ln() } else { v }).collect();
        let n = w.len() as f64;
        let loc = w.iter().sum::<f64>() / n;
        let scale = (w.iter().map(|v| (v - loc).powi(2)).sum::<f64>() / n).sqrt() * 1.5;
        Some(Self { positive, loc, scale })
    }

    fn forward(&self, z: f64) -> f64 {
        let w = if self.positive { z.ln() } else { z };
        normal_cdf(w, self.loc, self.scale)
    }

    /// `(z, dz/du)` at `u`.
    fn inverse(&self, u: f64) -> (f64, f64) {
        let w = normal_quantile(u, self.loc, self.scale);
        let phi = (-0.5 * ((w - self.loc) / self.scale).powi(2)).exp() / (self.scale * TAU.sqrt());
        if self.positive {
            let z = w.exp();
            (z, z / phi)
        } else {
            (w, 1.0 / phi)
        }
    }
}

#[test]
fn samplers_agree_with_densities() {
    const K: usize = 12;
    const N: usize = 100_000;
    for id in ModelId::all() {
        let model = make_model(id, &[]).unwrap();
        let pilot = sample_joint(&model, 20_000, &mut stream(100, &[id.to_string().len() as u64, 1])).unwrap();
        let tr = Transform::pilot(&pilot, model.support());
        let sample = sample_joint(&model, N, &mut stream(201, &[dirlin::rng::label(&id.to_string())])).unwrap();
        let cell = |v: f64| ((v * K as f64) as usize).min(K - 1);
        let mut counts = vec![0u64; K * K];
        for (t, b) in sample.theta().into_iter().zip(sample.second()) {
            let j = match &tr {
                Some(tr) => cell(tr.forward(b)),
                None => cell(b / TAU),
            };
            counts[cell(t / TAU) * K + j] += 1;
        }
        let (gt, wt) = gauss_legendre_on(16, 0.0, TAU / K as f64);
        let (gu, wu) = gauss_legendre_on(16, 0.0, 1.0 / K as f64);
        let mut probs = vec![0.0; K * K];
        for i in 0..K {
            for j in 0..K {
                let mut p = 0.0;
                for (x, wx) in gt.iter().zip(&wt) {
                    let t = i as f64 * TAU / K as f64 + x;
                    for (y, wy) in gu.iter().zip(&wu) {
                        let u = j as f64 / K as f64 + y;
                        p += match &tr {
                            Some(tr) => {
                                let (z, jac) = tr.inverse(u);
                                wx * wy * model.pdf(t, z) * jac
                            }
                            None => wx * wy * TAU * model.pdf(t, TAU * u),
                        };
                    }
                }
                probs[i * K + j] = p;
            }
        }
        let total: f64 = probs.iter().sum();
        assert!((total - 1.0).abs() < 1e-3, "{id}: cell mass {total}");
        let r = chi_square_test(&counts, &probs, 5.0);
        assert!(r.p_value > 0.001, "{id}: {r:?}");
    }
}
