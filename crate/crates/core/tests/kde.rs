use std::f64::consts::{PI, TAU};

use dirlin::hypothesis::grid_kernels;
use dirlin::kde::{kde_dirdir, kde_dirlin, Bandwidths};
use dirlin::kernel::{DirectionalKernel, KernelPair};
use dirlin::models::{make_model, sample_joint, JointSample, ModelId};
use dirlin::rng::stream;
use dirlin::special::{bessel_i, LineNodes, QuadratureGrid, Support};
use proptest::prelude::*;

fn unit(t: f64) -> [f64; 2] {
    [t.cos(), t.sin()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dirlin_estimate_integrates_to_one(
        pts in prop::collection::vec((0.0..TAU, -2.0f64..2.0), 1..30),
        h in 0.2f64..1.5,
        g in 0.2f64..1.0,
    ) {
        let (theta, z): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        let s = JointSample::from_pairs(Support::CircleLine, &theta, &z).unwrap();
        let bw = Bandwidths::new(h, g).unwrap();
        let grid = QuadratureGrid::circle_line(256, LineNodes::interval(600, -2.0 - 10.0 * g, 2.0 + 10.0 * g).unwrap());
        let f = grid_kernels(&s, &grid, &bw, &KernelPair::default()).unwrap().joint();
        prop_assert!(f.iter().all(|v| *v >= 0.0));
        let mass = grid.integrate_values(&f.iter().copied().collect::<Vec<_>>()).unwrap();
        prop_assert!((mass - 1.0).abs() < 1e-6, "mass {mass}");
    }

    #[test]
    fn dirlin_estimate_is_rotation_and_shift_equivariant(
        pts in prop::collection::vec((0.0..TAU, -2.0f64..2.0), 1..30),
        a in 0.0..TAU,
        c in -5.0f64..5.0,
        t in 0.0..TAU,
        z0 in -2.0f64..2.0,
    ) {
        let (theta, z): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        let s = JointSample::from_pairs(Support::CircleLine, &theta, &z).unwrap();
        let rt: Vec<f64> = theta.iter().map(|v| (v + a).rem_euclid(TAU)).collect();
        let rz: Vec<f64> = z.iter().map(|v| v + c).collect();
        let r = JointSample::from_pairs(Support::CircleLine, &rt, &rz).unwrap();
        let bw = Bandwidths::new(0.6, 0.4).unwrap();
        let k = KernelPair::default();
        let f0 = kde_dirlin(s.as_dirlin().unwrap(), &unit(t), z0, &bw, &k).unwrap();
        let f1 = kde_dirlin(r.as_dirlin().unwrap(), &unit(t + a), z0 + c, &bw, &k).unwrap();
        prop_assert!((f0 - f1).abs() <= 1e-10 * f0.max(1e-300), "{f0} vs {f1}");
    }

    #[test]
    fn dirdir_estimate_is_symmetric_under_swap(
        pts in prop::collection::vec((0.0..TAU, 0.0..TAU), 1..30),
        t in 0.0..TAU,
        u in 0.0..TAU,
    ) {
        let (a, b): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        let s = JointSample::from_pairs(Support::CircleCircle, &a, &b).unwrap();
        let w = JointSample::from_pairs(Support::CircleCircle, &b, &a).unwrap();
        let bw = Bandwidths::new(0.5, 0.5).unwrap();
        let vm = DirectionalKernel::VonMises;
        let f0 = kde_dirdir(s.as_dirdir().unwrap(), &unit(t), &unit(u), &bw, &vm, &vm).unwrap();
        let f1 = kde_dirdir(w.as_dirdir().unwrap(), &unit(u), &unit(t), &bw, &vm, &vm).unwrap();
        prop_assert!((f0 - f1).abs() <= 1e-12 * f0.max(1e-300));
    }

    #[test]
    fn bessel_recurrence_holds(nu in 1.0f64..20.0, x in 0.05f64..60.0) {
        let lo = bessel_i(nu - 1.0, x).unwrap().value;
        let mid = bessel_i(nu, x).unwrap().value;
        let hi = bessel_i(nu + 1.0, x).unwrap().value;
        let lhs = lo - hi;
        let rhs = 2.0 * nu / x * mid;
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(lo.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn sampling_is_reproducible_per_key(seed in any::<u64>(), idx in 0usize..24) {
        let id = if idx < 12 { ModelId::Cl(idx as u8 + 1) } else { ModelId::Cc(idx as u8 - 11) };
        let m = make_model(id, &[]).unwrap();
        let a = sample_joint(&m, 15, &mut stream(seed, &[3])).unwrap();
        let b = sample_joint(&m, 15, &mut stream(seed, &[3])).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.theta().iter().all(|t| (0.0..TAU).contains(t)));
    }
}

#[test]
fn single_point_estimate_peaks_at_the_point() {
    let s = JointSample::from_pairs(Support::CircleLine, &[PI], &[0.0]).unwrap();
    let bw = Bandwidths::new(0.5, 0.5).unwrap();
    let k = KernelPair::default();
    let at = kde_dirlin(s.as_dirlin().unwrap(), &unit(PI), 0.0, &bw, &k).unwrap();
    for t in [0.0, 1.0, 2.5, 3.5, 5.0] {
        assert!(kde_dirlin(s.as_dirlin().unwrap(), &unit(t), 0.3, &bw, &k).unwrap() < at);
    }
}
