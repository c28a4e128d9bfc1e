use chernoff_lab::experiments::{self, SamplingDomain};
use chernoff_lab::mixture::ShiftMixture;
use chernoff_lab::{ChernoffFamily, SemigroupOracle, TestFunction};
use proptest::prelude::*;

fn mixture() -> impl Strategy<Value = ShiftMixture> {
    prop::collection::vec((-4i32..=4, -1.0f64..1.0), 1..6).prop_map(|atoms| {
        // offsets on a quarter lattice so that sums are exact
        ShiftMixture::new(atoms.into_iter().map(|(k, w)| (k as f64 * 0.25, w))).unwrap()
    })
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn convolution_commutes(a in mixture(), b in mixture()) {
        prop_assert!(a.convolve(&b).unwrap().approx_eq(&b.convolve(&a).unwrap(), 1e-12));
    }

    #[test]
    fn convolution_associates(a in mixture(), b in mixture(), c in mixture()) {
        let l = a.convolve(&b).unwrap().convolve(&c).unwrap();
        let r = a.convolve(&b.convolve(&c).unwrap()).unwrap();
        for (x, y) in l.atoms().iter().zip(r.atoms()) {
            prop_assert!((x.offset - y.offset).abs() < 1e-12);
            prop_assert!((x.weight - y.weight).abs() < 1e-12);
        }
        prop_assert_eq!(l.len(), r.len());
    }

    #[test]
    fn norm_is_submultiplicative(a in mixture(), b in mixture()) {
        let ab = a.convolve(&b).unwrap();
        prop_assert!(ab.operator_norm() <= a.operator_norm() * b.operator_norm() * (1.0 + 1e-12));
    }

    #[test]
    fn charfn_multiplies(a in mixture(), b in mixture(), k in -3.0f64..3.0) {
        let lhs = a.convolve(&b).unwrap().charfn(k);
        let rhs = a.charfn(k) * b.charfn(k);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * a.operator_norm() * b.operator_norm() + 1e-15);
    }

    #[test]
    fn probability_moments_add(
        p in prop::collection::vec((-5.0f64..5.0, 0.01f64..1.0), 1..5),
        q in prop::collection::vec((-5.0f64..5.0, 0.01f64..1.0), 1..5),
    ) {
        let norm = |v: Vec<(f64, f64)>| {
            let s: f64 = v.iter().map(|x| x.1).sum();
            ShiftMixture::new(v.into_iter().map(|(o, w)| (o, w / s))).unwrap()
        };
        let (a, b) = (norm(p), norm(q));
        let ab = a.convolve(&b).unwrap();
        prop_assert!(ab.is_probability(1e-12));
        prop_assert!(rel_close(ab.mean(), a.mean() + b.mean(), 1e-10));
        prop_assert!(rel_close(ab.variance(), a.variance() + b.variance(), 1e-9));
    }

    #[test]
    fn power_matches_repeated_convolution(a in mixture(), n in 1u64..=24) {
        let fast = a.power(n).unwrap();
        let mut slow = a.clone();
        for _ in 1..n {
            slow = slow.convolve(&a).unwrap();
        }
        let scale = a.operator_norm().powi(n as i32).max(1.0);
        prop_assert_eq!(fast.len(), slow.len());
        for (x, y) in fast.atoms().iter().zip(slow.atoms()) {
            prop_assert!((x.offset - y.offset).abs() < 1e-9);
            prop_assert!((x.weight - y.weight).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn apply_is_linear_in_the_function(a in mixture(), x in -3.0f64..3.0, al in -5.0f64..5.0, be in -5.0f64..5.0) {
        let f = TestFunction::sine(1.0).unwrap();
        let g = TestFunction::gaussian(0.7).unwrap();
        let h = TestFunction::linear_combination(al, &f, be, &g);
        let lhs = a.apply(&h, x).unwrap();
        let rhs = al * a.apply(&f, x).unwrap() + be * a.apply(&g, x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * a.operator_norm() * (al.abs() + be.abs() + 1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn error_triangle_inequality(al in -10.0f64..10.0, be in -10.0f64..10.0) {
        let fam = ChernoffFamily::heat_g(1.0).unwrap();
        let oracle = SemigroupOracle::heat_spectral(1.0).unwrap();
        let f = TestFunction::sine(1.0).unwrap();
        let g = TestFunction::sine(2.0).unwrap();
        let dom = SamplingDomain::new(0.0, 2.0 * std::f64::consts::PI, 401).unwrap();
        let r = experiments::linearity_check(&fam, &oracle, &f, &g, al, be, 0.5, &[8, 64], &dom).unwrap();
        prop_assert!(r.max_violation <= 1e-10 * r.scale);
    }
}

/// Enlarging the probed time set can only raise the sup-ratio.
#[test]
fn subspace_ratio_monotone_in_times() {
    let fam = ChernoffFamily::quadratic_shift(1.0).unwrap();
    let oracle = SemigroupOracle::translation();
    let f = TestFunction::holder_sine(0.5).unwrap();
    let w = chernoff_lab::RateFunction::power(0.5).unwrap();
    let ns = [16, 32, 64, 128, 256];
    let curves: Vec<_> = [0.25, 0.5, 1.0]
        .iter()
        .map(|&t| {
            let dom = SamplingDomain::default_for(&f, oracle.generator(), t).unwrap();
            experiments::error_curve(&fam, &oracle, &f, t, &ns, &dom).unwrap()
        })
        .collect();
    let mut last = 0.0;
    for k in 1..=curves.len() {
        let probe = experiments::subspace_probe(&curves[..k], &w).unwrap();
        assert!(probe.sup_ratio >= last);
        last = probe.sup_ratio;
    }
}

/// A finer grid never reports a smaller sup error, and for a smooth periodic
/// function the two agree closely.
#[test]
fn grid_refinement() {
    let fam = ChernoffFamily::heat_g(1.0).unwrap();
    let oracle = SemigroupOracle::heat_spectral(1.0).unwrap();
    let f = TestFunction::sine(1.0).unwrap();
    let two_pi = 2.0 * std::f64::consts::PI;
    let coarse = SamplingDomain::new(0.0, two_pi, 1001).unwrap();
    let fine = SamplingDomain::new(0.0, two_pi, 2001).unwrap();
    for n in [16, 256] {
        let ec = experiments::sup_error(&fam, &oracle, &f, 1.0, n, &coarse).unwrap();
        let ef = experiments::sup_error(&fam, &oracle, &f, 1.0, n, &fine).unwrap();
        assert!(ef >= ec * (1.0 - 1e-12));
        assert!((ef - ec) / ef < 1e-5, "n={n}: {ec} vs {ef}");
    }
}
