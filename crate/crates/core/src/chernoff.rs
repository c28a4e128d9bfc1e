//! Chernoff functions as mixture-valued maps `t ↦ G(t)`, and numeric
//! checks of the conditions that make them converge: tangency to the
//! generator, norm growth, and how many heat-kernel moments they reproduce.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::experiments::SamplingDomain;
use crate::mixture::ShiftMixture;
use crate::semigroups::Generator;
use crate::testfns::TestFunction;

/// Family names accepted by [`ChernoffFamily::parse`].
pub const CATALOG: &[(&str, &str)] = &[
    (
        "translation_exact",
        "G(t)f(x) = f(x+t), the translation semigroup itself",
    ),
    (
        "perturbed_shift:<rate>",
        "G(t)f(x) = f(x+t+t w(1/t)); rate is zero | inv_log | power:<p>",
    ),
    (
        "quadratic_shift:<coef>",
        "G(t)f(x) = f(x+t+coef t^2), coef != 0",
    ),
    (
        "heat_G",
        "weights 1/4, 1/2, 1/4 at offsets -2a sqrt(t), 0, 2a sqrt(t)",
    ),
    (
        "heat_S",
        "weights 1/6, 2/3, 1/6 at offsets -a sqrt(6t), 0, a sqrt(6t)",
    ),
];

type WFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type BuildFn = Arc<dyn Fn(f64) -> Result<ShiftMixture> + Send + Sync>;

/// A decay profile `w: [1, ∞) → [0, ∞)` with `w(x) → 0`.
#[derive(Clone)]
pub struct RateFunction {
    w: WFn,
    description: String,
}

impl fmt::Debug for RateFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RateFunction")
            .field("description", &self.description)
            .finish_non_exhaustive()
    }
}

impl RateFunction {
    /// Wraps `w` after checking its decay on the samples `x = 10¹ … 10⁸`:
    /// every value finite and non-negative, the last three samples
    /// non-increasing, and `w(10⁸)` at most a quarter of the largest sample.
    pub fn new<F>(description: impl Into<String>, w: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let description = description.into();
        let samples: Vec<f64> = (1..=8).map(|e| w(10f64.powi(e))).collect();
        if samples.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Construction(format!(
                "rate function {description} must be finite and non-negative, samples {samples:?}"
            )));
        }
        let tail = &samples[5..];
        let peak = samples.iter().copied().fold(0.0, f64::max);
        if tail.windows(2).any(|p| p[1] > p[0]) || samples[7] > 0.25 * peak {
            return Err(Error::Construction(format!(
                "rate function {description} does not decay to zero, samples {samples:?}"
            )));
        }
        Ok(Self {
            w: Arc::new(w),
            description,
        })
    }

    pub fn zero() -> Self {
        Self::new("zero", |_| 0.0).expect("zero decays")
    }

    /// `1 / ln(e + x)`: slower than any power of `1/x`.
    pub fn inv_log() -> Self {
        Self::new("inv_log", |x| 1.0 / (std::f64::consts::E + x).ln()).expect("inv_log decays")
    }

    /// `x^{−p}` for `p > 0`.
    pub fn power(p: f64) -> Result<Self> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::Construction(format!(
                "power rate needs p > 0, got {p}"
            )));
        }
        Self::new(format!("power:{p}"), move |x| x.powf(-p))
    }

    /// Parses `zero`, `inv_log` or `power:<p>`.
    pub fn parse(spec: &str) -> Result<Self> {
        match spec.trim() {
            "zero" => Ok(Self::zero()),
            "inv_log" => Ok(Self::inv_log()),
            s => match s.split_once(':') {
                Some(("power", p)) => Self::power(
                    p.trim()
                        .parse()
                        .map_err(|_| Error::Usage(format!("bad exponent in rate spec {s:?}")))?,
                ),
                _ => Err(Error::Usage(format!(
                    "unknown rate {s:?}; expected zero, inv_log or power:<p>"
                ))),
            },
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.w)(x)
    }

    pub fn description(&self) -> &str {
        &self.description
    }
}

/// A Chernoff function `t ↦ G(t)` whose values are shift mixtures.
#[derive(Clone)]
pub struct ChernoffFamily {
    name: String,
    build: BuildFn,
    target: Generator,
    params: Vec<(String, f64)>,
}

impl fmt::Debug for ChernoffFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChernoffFamily")
            .field("name", &self.name)
            .field("target", &self.target)
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

impl ChernoffFamily {
    /// A family from an arbitrary builder. `build(0)` is always the identity
    /// regardless of what the builder returns there.
    pub fn custom<F>(name: impl Into<String>, target: Generator, build: F) -> Self
    where
        F: Fn(f64) -> Result<ShiftMixture> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            build: Arc::new(build),
            target,
            params: Vec::new(),
        }
    }

    fn with_params(mut self, params: &[(&str, f64)]) -> Self {
        self.params = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        self
    }

    /// `G(t) = e^{tL}` for `L = d/dx`: a pure shift by `t`.
    pub fn translation_exact() -> Self {
        Self::custom("translation_exact", Generator::Translation, |t| {
            Ok(ShiftMixture::dirac(t))
        })
    }

    /// `(G(t)f)(x) = f(x + t + t w(1/t))`.
    pub fn perturbed_shift(w: RateFunction) -> Self {
        let name = format!("perturbed_shift:{}", w.description());
        Self::custom(name, Generator::Translation, move |t| {
            let offset = t + t * w.eval(1.0 / t);
            if !offset.is_finite() {
                return Err(Error::Construction(format!(
                    "rate {} is not finite at 1/t = {}",
                    w.description(),
                    1.0 / t
                )));
            }
            Ok(ShiftMixture::dirac(offset))
        })
    }

    /// `(G(t)f)(x) = f(x + t + coef t²)`.
    pub fn quadratic_shift(coef: f64) -> Result<Self> {
        if coef == 0.0 || !coef.is_finite() {
            return Err(Error::Construction(format!(
                "quadratic_shift needs a finite non-zero coefficient, got {coef} \
                 (coef = 0 is translation_exact)"
            )));
        }
        Ok(Self::custom(
            format!("quadratic_shift:{coef}"),
            Generator::Translation,
            move |t| Ok(ShiftMixture::dirac(t + coef * t * t)),
        )
        .with_params(&[("coef", coef)]))
    }

    /// `(G(t)f)(x) = ¼ f(x + 2a√t) + ½ f(x) + ¼ f(x − 2a√t)`.
    pub fn heat_g(a: f64) -> Result<Self> {
        check_diffusion(a)?;
        Ok(Self::custom("heat_G", Generator::Heat { a }, move |t| {
            let h = 2.0 * a * t.sqrt();
            ShiftMixture::new([(-h, 0.25), (0.0, 0.5), (h, 0.25)])
        })
        .with_params(&[("a", a)]))
    }

    /// `(S(t)f)(x) = ⅔ f(x) + ⅙ f(x + a√(6t)) + ⅙ f(x − a√(6t))`.
    pub fn heat_s(a: f64) -> Result<Self> {
        check_diffusion(a)?;
        Ok(Self::custom("heat_S", Generator::Heat { a }, move |t| {
            let h = a * (6.0 * t).sqrt();
            ShiftMixture::new([(-h, 1.0 / 6.0), (0.0, 2.0 / 3.0), (h, 1.0 / 6.0)])
        })
        .with_params(&[("a", a)]))
    }

    /// Parses a catalog name; heat families take their diffusion from `a`.
    pub fn parse(spec: &str, a: f64) -> Result<Self> {
        let spec = spec.trim();
        let (name, param) = match spec.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (spec, None),
        };
        match (name, param) {
            ("translation_exact", None) => Ok(Self::translation_exact()),
            ("perturbed_shift", Some(rate)) => {
                Ok(Self::perturbed_shift(RateFunction::parse(rate)?))
            }
            ("quadratic_shift", Some(coef)) => {
                Self::quadratic_shift(coef.trim().parse().map_err(|_| {
                    Error::Usage(format!("bad coefficient in family spec {spec:?}"))
                })?)
            }
            ("heat_G", None) => Self::heat_g(a),
            ("heat_S", None) => Self::heat_s(a),
            _ => {
                let names: Vec<&str> = CATALOG.iter().map(|(n, _)| *n).collect();
                Err(Error::Usage(format!(
                    "unknown family {spec:?}; catalog: {}",
                    names.join(", ")
                )))
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn target(&self) -> Generator {
        self.target
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    /// `G(t)`; the identity at `t = 0`.
    pub fn build(&self, t: f64) -> Result<ShiftMixture> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!(
                "family {} needs t >= 0, got {t}",
                self.name
            )));
        }
        if t == 0.0 {
            return Ok(ShiftMixture::identity());
        }
        (self.build)(t)
    }

    /// `G(t/n)ⁿ`.
    pub fn chernoff_power(&self, t: f64, n: u64) -> Result<ShiftMixture> {
        if n == 0 {
            return Err(Error::Domain("Chernoff power needs n >= 1".into()));
        }
        self.build(t / n as f64)?.power(n)
    }
}

fn check_diffusion(a: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Construction(format!(
            "diffusion coefficient must be positive, got {a}"
        )));
    }
    Ok(())
}

/// For each `t`, `sup_x |(G(t)f(x) − f(x))/t − (Lf)(x)|` over the grid.
///
/// `lf` must be the exact generator action on `f`.
pub fn tangency_check(
    family: &ChernoffFamily,
    f: &TestFunction,
    lf: &TestFunction,
    ts: &[f64],
    domain: &SamplingDomain,
) -> Result<Vec<f64>> {
    if !f.is_smooth() {
        return Err(Error::Domain(format!(
            "tangency probe needs a smooth function, {} is not",
            f.name()
        )));
    }
    if let Some(&bad) = ts.iter().find(|&&t| !(t > 0.0)) {
        return Err(Error::Domain(format!(
            "tangency probe times must be > 0, got {bad}"
        )));
    }
    let xs: Vec<f64> = domain.points().collect();
    ts.iter()
        .map(|&t| {
            let m = family.build(t)?;
            let mut worst = 0.0f64;
            for &x in &xs {
                let r = ((m.apply(f, x)? - f.eval(x)) / t - lf.eval(x)).abs();
                if !r.is_finite() {
                    return Err(Error::Evaluation(format!(
                        "tangency residual at x={x}, t={t}"
                    )));
                }
                worst = worst.max(r);
            }
            Ok(worst)
        })
        .collect()
}

/// Result of [`norm_growth_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormGrowth {
    pub omega_estimate: f64,
    pub satisfied: bool,
}

/// `max_t ln‖G(t)‖ / t`, and whether it stays at or below `omega`.
pub fn norm_growth_check(family: &ChernoffFamily, ts: &[f64], omega: f64) -> Result<NormGrowth> {
    if ts.is_empty() {
        return Err(Error::Domain(
            "norm growth check needs at least one time".into(),
        ));
    }
    let mut estimate = f64::NEG_INFINITY;
    for &t in ts {
        if !(t > 0.0) {
            return Err(Error::Domain(format!(
                "norm growth times must be > 0, got {t}"
            )));
        }
        estimate = estimate.max(family.build(t)?.operator_norm().ln() / t);
    }
    Ok(NormGrowth {
        omega_estimate: estimate,
        satisfied: estimate <= omega,
    })
}

/// One row of the moment comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentRow {
    pub k: u32,
    pub moment: f64,
    pub gaussian: f64,
    pub matches: bool,
}

/// Result of [`moment_match_order`]. The exponent is a prediction from the
/// moment-matching heuristic, not a proven rate.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentMatch {
    pub first_mismatch: Option<u32>,
    pub predicted_exponent: Option<f64>,
    pub rows: Vec<MomentRow>,
}

pub const MOMENT_RTOL: f64 = 1e-9;

/// `E[Xᵏ]` for `X ~ N(0, 2a²t)`: `(2a²t)^{k/2} (k−1)!!` for even `k`.
pub fn gaussian_moment(k: u32, a: f64, t: f64) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let var = 2.0 * a * a * t;
    let double_factorial: f64 = (1..k).step_by(2).map(|j| j as f64).product();
    var.powi((k / 2) as i32) * double_factorial
}

/// Compares the moments of `G(t)` with those of the heat kernel for
/// `k = 0..=kmax`. A first mismatch at order `k` predicts an error of order
/// `n^{−(k−2)/2}`.
pub fn moment_match_order(
    family: &ChernoffFamily,
    a: f64,
    t: f64,
    kmax: u32,
) -> Result<MomentMatch> {
    if !matches!(family.target(), Generator::Heat { .. }) {
        return Err(Error::Domain(format!(
            "moment matching compares against the heat kernel; {} targets {}",
            family.name(),
            family.target()
        )));
    }
    if kmax < 2 {
        return Err(Error::Domain(format!("kmax must be >= 2, got {kmax}")));
    }
    if !(t > 0.0) || !(a > 0.0) {
        return Err(Error::Domain(format!(
            "moment matching needs a > 0 and t > 0, got a={a}, t={t}"
        )));
    }
    let m = family.build(t)?;
    let rows: Vec<MomentRow> = (0..=kmax)
        .map(|k| {
            let moment = m.moment(k);
            let gaussian = gaussian_moment(k, a, t);
            let scale = gaussian.abs().max((2.0 * a * a * t).powf(k as f64 / 2.0));
            MomentRow {
                k,
                moment,
                gaussian,
                matches: (moment - gaussian).abs() <= MOMENT_RTOL * scale,
            }
        })
        .collect();
    let first_mismatch = rows.iter().find(|r| !r.matches).map(|r| r.k);
    Ok(MomentMatch {
        first_mismatch,
        predicted_exponent: first_mismatch.map(|k| (k as f64 - 2.0) / 2.0),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn catalog_families() -> Vec<ChernoffFamily> {
        vec![
            ChernoffFamily::translation_exact(),
            ChernoffFamily::perturbed_shift(RateFunction::inv_log()),
            ChernoffFamily::quadratic_shift(1.0).unwrap(),
            ChernoffFamily::heat_g(1.0).unwrap(),
            ChernoffFamily::heat_s(0.7).unwrap(),
        ]
    }

    #[test]
    fn family_invariants() {
        for fam in catalog_families() {
            assert_eq!(
                fam.build(0.0).unwrap(),
                ShiftMixture::identity(),
                "{}",
                fam.name()
            );
            for t in [1e-6, 0.01, 0.3, 1.0, 5.0] {
                let m = fam.build(t).unwrap();
                assert!(m.len() <= 3);
                assert!(m.atoms().iter().all(|a| a.weight >= 0.0));
                assert_relative_eq!(m.operator_norm(), 1.0, max_relative = 1e-15);
            }
            assert!(fam.build(-1.0).is_err());
        }
    }

    #[test]
    fn heat_families_are_symmetric() {
        for fam in [
            ChernoffFamily::heat_g(1.2).unwrap(),
            ChernoffFamily::heat_s(1.2).unwrap(),
        ] {
            let m = fam.build(0.4).unwrap();
            for k in [1, 3, 5, 7] {
                let scale = m.moment(k + 1).abs();
                assert!(m.moment(k).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn exact_family_powers() {
        let fam = ChernoffFamily::translation_exact();
        let p = fam.chernoff_power(1.0, 64).unwrap();
        assert_eq!(p, ShiftMixture::dirac(1.0));
    }

    #[test]
    fn perturbed_shift_zero_rate_is_exact() {
        let a = ChernoffFamily::perturbed_shift(RateFunction::zero());
        let b = ChernoffFamily::translation_exact();
        for t in [0.0, 0.1, 1.0] {
            assert_eq!(a.build(t).unwrap(), b.build(t).unwrap());
        }
    }

    #[test]
    fn perturbed_shift_power_offset() {
        let w = RateFunction::inv_log();
        let fam = ChernoffFamily::perturbed_shift(w.clone());
        let t = 1.5;
        let mut last = f64::INFINITY;
        for n in [4u64, 32, 256, 2048] {
            let p = fam.chernoff_power(t, n).unwrap();
            let expect = t + t * w.eval(n as f64 / t);
            assert_relative_eq!(p.atoms()[0].offset, expect, max_relative = 1e-13);
            assert!(expect < last && expect > t);
            last = expect;
        }
    }

    #[test]
    fn quadratic_shift_power_offset() {
        let fam = ChernoffFamily::quadratic_shift(0.5).unwrap();
        let (t, n) = (2.0, 40u64);
        let p = fam.chernoff_power(t, n).unwrap();
        assert_relative_eq!(
            p.atoms()[0].offset,
            t + 0.5 * t * t / n as f64,
            max_relative = 1e-14
        );
        assert!(ChernoffFamily::quadratic_shift(0.0).is_err());
    }

    #[test]
    fn heat_moments() {
        let (a, t) = (1.3, 0.45);
        let g = ChernoffFamily::heat_g(a).unwrap().build(t).unwrap();
        let s = ChernoffFamily::heat_s(a).unwrap().build(t).unwrap();
        let (a2, a4, a6) = (a * a, a.powi(4), a.powi(6));
        assert_relative_eq!(g.moment(2), 2.0 * a2 * t, max_relative = 1e-14);
        assert_relative_eq!(g.moment(4), 8.0 * a4 * t * t, max_relative = 1e-14);
        assert_relative_eq!(s.moment(2), 2.0 * a2 * t, max_relative = 1e-14);
        assert_relative_eq!(s.moment(4), 12.0 * a4 * t * t, max_relative = 1e-14);
        // 2 · ⅙ · (6a²t)³
        assert_relative_eq!(s.moment(6), 72.0 * a6 * t.powi(3), max_relative = 1e-14);
        assert_relative_eq!(
            gaussian_moment(6, a, t),
            120.0 * a6 * t.powi(3),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            gaussian_moment(4, a, t),
            12.0 * a4 * t * t,
            max_relative = 1e-14
        );
    }

    #[test]
    fn moment_orders() {
        let g = moment_match_order(&ChernoffFamily::heat_g(1.0).unwrap(), 1.0, 1.0, 8).unwrap();
        assert_eq!(g.first_mismatch, Some(4));
        assert_eq!(g.predicted_exponent, Some(1.0));
        let s = moment_match_order(&ChernoffFamily::heat_s(1.0).unwrap(), 1.0, 1.0, 8).unwrap();
        assert_eq!(s.first_mismatch, Some(6));
        assert_eq!(s.predicted_exponent, Some(2.0));
        assert!(matches!(
            moment_match_order(&ChernoffFamily::translation_exact(), 1.0, 1.0, 8),
            Err(Error::Domain(_))
        ));
        assert!(moment_match_order(&ChernoffFamily::heat_g(1.0).unwrap(), 1.0, 1.0, 1).is_err());
    }

    #[test]
    fn norm_growth() {
        let ts = [1e-3, 1e-2, 0.1, 1.0];
        for fam in [
            ChernoffFamily::heat_g(1.0).unwrap(),
            ChernoffFamily::heat_s(1.0).unwrap(),
        ] {
            let r = norm_growth_check(&fam, &ts, 0.0).unwrap();
            assert!(r.omega_estimate.abs() <= 1e-12);
        }
        let inflated = ChernoffFamily::custom("inflated", Generator::Heat { a: 1.0 }, |t| {
            ShiftMixture::new([(-t.sqrt(), 0.5), (t.sqrt(), 2.0 / 3.0)])
        });
        let r = norm_growth_check(&inflated, &ts, 0.0).unwrap();
        assert!(r.omega_estimate > 0.0 && !r.satisfied);
        assert_relative_eq!(
            inflated.build(1.0).unwrap().operator_norm(),
            7.0 / 6.0,
            max_relative = 1e-15
        );
        assert!(norm_growth_check(&inflated, &[], 0.0).is_err());
    }

    #[test]
    fn tangency_residuals() {
        let dom = SamplingDomain::new(0.0, 2.0 * std::f64::consts::PI, 2001).unwrap();
        let f = TestFunction::sine(1.0).unwrap();
        let ts: Vec<f64> = (1..=5).map(|e| 10f64.powi(-e)).collect();

        let exact = ChernoffFamily::translation_exact();
        let lf = f.translation_generator().unwrap();
        let r = tangency_check(&exact, &f, &lf, &ts, &dom).unwrap();
        for (res, t) in r.iter().zip(&ts) {
            // Taylor remainder of sin(x+t) − sin x − t cos x, divided by t
            assert!(*res <= 0.5 * t * 1.0001 && *res >= 0.4 * t);
        }

        let lf = f.heat_generator(1.0).unwrap();
        let rg = tangency_check(&ChernoffFamily::heat_g(1.0).unwrap(), &f, &lf, &ts, &dom).unwrap();
        let rs = tangency_check(&ChernoffFamily::heat_s(1.0).unwrap(), &f, &lf, &ts, &dom).unwrap();
        for i in 0..ts.len() {
            // leading terms: G gives t/3, S gives t/2 (it reproduces the
            // second-order term t²L²/2 of the exact semigroup)
            assert_relative_eq!(rg[i] / ts[i], 1.0 / 3.0, max_relative = 0.05);
            assert_relative_eq!(rs[i] / ts[i], 0.5, max_relative = 0.05);
        }

        assert!(tangency_check(&exact, &f, &lf, &[0.1, 0.0], &dom).is_err());
        let rough = TestFunction::holder_sine(0.5).unwrap();
        assert!(tangency_check(&exact, &rough, &lf, &ts, &dom).is_err());
    }

    #[test]
    fn rate_function_validation() {
        assert!(RateFunction::new("constant", |_| 1.0).is_err());
        assert!(RateFunction::new("growing", |x| x).is_err());
        assert!(RateFunction::new("negative", |x| -1.0 / x).is_err());
        assert!(RateFunction::power(0.5).is_ok());
        assert!(RateFunction::power(0.0).is_err());
        assert!(RateFunction::parse("power:1").is_ok());
        assert!(RateFunction::parse("bogus").is_err());
    }

    #[test]
    fn parse_catalog() {
        for spec in [
            "translation_exact",
            "perturbed_shift:inv_log",
            "quadratic_shift:2",
            "heat_G",
            "heat_S",
        ] {
            assert!(ChernoffFamily::parse(spec, 1.0).is_ok(), "{spec}");
        }
        match ChernoffFamily::parse("heat_X", 1.0) {
            Err(Error::Usage(msg)) => assert!(msg.contains("heat_S")),
            other => panic!("{other:?}"),
        }
        assert!(ChernoffFamily::parse("heat_G", -1.0).is_err());
    }
}
