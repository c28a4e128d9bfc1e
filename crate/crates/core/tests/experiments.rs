use std::f64::consts::PI;

use chernoff_lab::experiments::{self, default_ns, SamplingDomain};
use chernoff_lab::{ChernoffFamily, RateFunction, SemigroupOracle, TestFunction};

fn sine_domain() -> SamplingDomain {
    SamplingDomain::new(0.0, 2.0 * PI, 2001).unwrap()
}

#[test]
fn holder_half_is_not_in_order_one_subspace() {
    let fam = ChernoffFamily::quadratic_shift(1.0).unwrap();
    let oracle = SemigroupOracle::translation();
    let f = TestFunction::holder_sine(0.5).unwrap();
    let dom = SamplingDomain::default_for(&f, oracle.generator(), 1.0).unwrap();
    let curve = experiments::error_curve(&fam, &oracle, &f, 1.0, &default_ns(), &dom).unwrap();
    let curves = [curve];
    let half = experiments::subspace_probe(&curves, &RateFunction::power(0.5).unwrap()).unwrap();
    let one = experiments::subspace_probe(&curves, &RateFunction::power(1.0).unwrap()).unwrap();
    assert!(half.bounded);
    assert!(!one.bounded);
    // ratio against n^-1 grows like n^½
    let r = &one.ratios;
    let growth = (r[r.len() - 1] / r[0]).ln() / (4096f64 / 16.0).ln();
    assert!((growth - 0.5).abs() < 0.05, "{growth}");
}

#[test]
fn slow_rate_square_root_envelope() {
    let w = RateFunction::power(0.5).unwrap();
    let res =
        experiments::slow_convergence_experiment(&w, 1.0, &default_ns(), &sine_domain()).unwrap();
    assert!(res.holds);
    for row in &res.rows {
        let envelope = 0.5 / (row.n as f64).sqrt();
        assert!(
            row.error >= envelope && row.error <= 4.0 * envelope,
            "n={}",
            row.n
        );
    }
}

#[test]
fn inverse_log_rate_fits_near_zero_exponent() {
    let fam = ChernoffFamily::perturbed_shift(RateFunction::inv_log());
    let oracle = SemigroupOracle::translation();
    let f = TestFunction::sine(1.0).unwrap();
    let curve =
        experiments::error_curve(&fam, &oracle, &f, 1.0, &default_ns(), &sine_domain()).unwrap();
    let fit = experiments::fit_rate(&curve, 1).unwrap();
    // local slope of 1/ln n is 1/ln n, about 0.2 on this range
    assert!(
        fit.exponent > 0.0 && fit.exponent < 0.25,
        "{}",
        fit.exponent
    );
    let c = experiments::fit_rate(&curve, 512).unwrap();
    assert!(c.exponent < fit.exponent);
}

#[test]
fn linearity_worked_example() {
    let fam = ChernoffFamily::heat_g(1.0).unwrap();
    let oracle = SemigroupOracle::heat_spectral(1.0).unwrap();
    let f = TestFunction::sine(1.0).unwrap();
    let g = TestFunction::gaussian(1.0).unwrap();
    let h = TestFunction::linear_combination(2.0, &f, -3.0, &g);
    let dom = SamplingDomain::default_for(&h, fam.target(), 1.0).unwrap();
    let r =
        experiments::linearity_check(&fam, &oracle, &f, &g, 2.0, -3.0, 1.0, &default_ns(), &dom)
            .unwrap();
    for row in &r.rows {
        let bound = 1e-10 * (2.0 * row.error_f + 3.0 * row.error_g + 1.0);
        assert!(row.violation <= bound);
    }
    let trivial = experiments::linearity_check(
        &fam,
        &oracle,
        &f,
        &f,
        0.5,
        0.5,
        1.0,
        &[16, 256],
        &sine_domain(),
    )
    .unwrap();
    assert!(trivial.max_violation <= 1e-15);
}

#[test]
fn reruns_are_bit_identical() {
    let fam = ChernoffFamily::heat_s(1.0).unwrap();
    let oracle = SemigroupOracle::heat_quadrature(1.0, 64).unwrap();
    let f = TestFunction::gaussian(1.0).unwrap();
    let dom = SamplingDomain::default_for(&f, fam.target(), 1.0).unwrap();
    let a = experiments::error_curve(&fam, &oracle, &f, 1.0, &[16, 64, 256], &dom).unwrap();
    let b = experiments::error_curve(&fam, &oracle, &f, 1.0, &[16, 64, 256], &dom).unwrap();
    let bits =
        |c: &experiments::ErrorCurve| c.errors.iter().map(|e| e.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
}
