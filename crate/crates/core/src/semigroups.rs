//! Exact semigroups the Chernoff approximations are measured against:
//! translation `(e^{tL}f)(x) = f(x + t)` for `L = d/dx`, and the heat
//! semigroup for `L = a² d²/dx²`, given by convolution with the Gaussian
//! kernel `Φ(x, t) = (2a√(πt))⁻¹ exp(−x²/(4a²t))`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussHermite;
use crate::testfns::TestFunction;

pub const DEFAULT_QUADRATURE_NODES: usize = 64;

/// The generator a family or oracle refers to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Generator {
    /// `L = d/dx`.
    Translation,
    /// `L = a² d²/dx²`.
    Heat { a: f64 },
}

impl Generator {
    pub fn is_compatible(&self, other: &Generator) -> bool {
        match (self, other) {
            (Generator::Translation, Generator::Translation) => true,
            (Generator::Heat { a }, Generator::Heat { a: b }) => {
                (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
            }
            _ => false,
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Translation => write!(f, "d/dx"),
            Generator::Heat { a } => write!(f, "{a}^2 d2/dx2"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    Translation,
    HeatSpectral,
    HeatQuadrature,
}

impl fmt::Display for OracleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OracleKind::Translation => "translation",
            OracleKind::HeatSpectral => "heat_spectral",
            OracleKind::HeatQuadrature => "heat_quadrature",
        })
    }
}

/// `f(x + t)`.
pub fn translate(f: &TestFunction, t: f64, x: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!(
            "translation time must be >= 0, got {t}"
        )));
    }
    Ok(f.eval(x + t))
}

/// Heat evolution of `sin(kx)`: `exp(−a²k²t) sin(kx)`.
pub fn heat_spectral(k: f64, a: f64, t: f64, x: f64) -> Result<f64> {
    check_heat_args(a, t)?;
    Ok((-a * a * k * k * t).exp() * (k * x).sin())
}

/// Poisson integral `(1/√π) ∫ e^{−s²} f(x + 2a√t s) ds` with a freshly
/// built rule of `nodes` points.
pub fn heat_quadrature(f: &TestFunction, a: f64, t: f64, x: f64, nodes: usize) -> Result<f64> {
    let rule = GaussHermite::new(nodes)?;
    heat_quadrature_with(&rule, f, a, t, x)
}

/// As [`heat_quadrature`], reusing a precomputed rule.
pub fn heat_quadrature_with(
    rule: &GaussHermite,
    f: &TestFunction,
    a: f64,
    t: f64,
    x: f64,
) -> Result<f64> {
    check_heat_args(a, t)?;
    if t == 0.0 {
        return Err(Error::Domain(
            "heat quadrature at t=0; evaluate f(x) directly".into(),
        ));
    }
    let spread = 2.0 * a * t.sqrt();
    let value = rule.integrate(|s| f.eval(x + spread * s)) / PI.sqrt();
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Evaluation(format!(
            "heat quadrature of {} at x={x}, t={t} gave {value}",
            f.name()
        )))
    }
}

fn check_heat_args(a: f64, t: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain(format!(
            "diffusion coefficient must be positive, got {a}"
        )));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("heat time must be >= 0, got {t}")));
    }
    Ok(())
}

/// An exact semigroup `e^{tL}` ready for evaluation. Quadrature nodes are
/// computed once at construction.
#[derive(Debug, Clone)]
pub struct SemigroupOracle {
    kind: OracleKind,
    a: f64,
    rule: Option<Arc<GaussHermite>>,
}

impl SemigroupOracle {
    pub fn translation() -> Self {
        Self {
            kind: OracleKind::Translation,
            a: 0.0,
            rule: None,
        }
    }

    /// Heat semigroup evaluated through each test function's closed form.
    pub fn heat_spectral(a: f64) -> Result<Self> {
        check_heat_args(a, 0.0)?;
        Ok(Self {
            kind: OracleKind::HeatSpectral,
            a,
            rule: None,
        })
    }

    /// Heat semigroup evaluated by Gauss–Hermite quadrature. The node count
    /// must be even and at least 2.
    ///
    /// With 64 nodes the rule is reliable for oscillatory data only while
    /// `a·k·√t ≤ 2` (k the frequency); double `nodes` beyond that, or use the
    /// spectral oracle for trigonometric functions.
    pub fn heat_quadrature(a: f64, nodes: usize) -> Result<Self> {
        check_heat_args(a, 0.0)?;
        if nodes < 2 || !nodes.is_multiple_of(2) {
            return Err(Error::Construction(format!(
                "quadrature node count must be even and >= 2, got {nodes}"
            )));
        }
        Ok(Self {
            kind: OracleKind::HeatQuadrature,
            a,
            rule: Some(Arc::new(GaussHermite::new(nodes)?)),
        })
    }

    pub fn kind(&self) -> OracleKind {
        self.kind
    }

    pub fn diffusion(&self) -> Option<f64> {
        match self.kind {
            OracleKind::Translation => None,
            _ => Some(self.a),
        }
    }

    pub fn nodes(&self) -> Option<usize> {
        self.rule.as_ref().map(|r| r.len())
    }

    pub fn generator(&self) -> Generator {
        match self.kind {
            OracleKind::Translation => Generator::Translation,
            _ => Generator::Heat { a: self.a },
        }
    }

    /// Checks up front that the oracle can evolve `f`.
    pub fn supports(&self, f: &TestFunction) -> Result<()> {
        if self.kind == OracleKind::HeatSpectral && !f.has_heat_closed_form() {
            return Err(Error::Configuration(format!(
                "heat_spectral oracle needs a closed-form heat evolution, {} has none",
                f.name()
            )));
        }
        Ok(())
    }

    /// `(e^{tL} f)(x)`.
    pub fn evolve(&self, f: &TestFunction, t: f64, x: f64) -> Result<f64> {
        match self.kind {
            OracleKind::Translation => translate(f, t, x),
            OracleKind::HeatSpectral => {
                check_heat_args(self.a, t)?;
                f.heat_closed_form(self.a, t, x).ok_or_else(|| {
                    Error::Configuration(format!("{} has no closed-form heat evolution", f.name()))
                })
            }
            OracleKind::HeatQuadrature => {
                let rule = self.rule.as_ref().expect("quadrature oracle owns a rule");
                heat_quadrature_with(rule, f, self.a, t, x)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn translation_values() {
        let f = TestFunction::sine(1.0).unwrap();
        assert_eq!(translate(&f, 0.0, 0.3).unwrap(), f.eval(0.3));
        assert!(translate(&f, PI, 0.0).unwrap().abs() < 1e-15);
        let g = TestFunction::gaussian(1.0).unwrap();
        assert_eq!(translate(&g, 1.0, 2.0).unwrap(), g.eval(3.0));
        assert!(translate(&g, -1.0, 0.0).is_err());
    }

    #[test]
    fn spectral_values() {
        assert_eq!(heat_spectral(1.0, 1.0, 0.0, 0.4).unwrap(), 0.4f64.sin());
        assert_relative_eq!(
            heat_spectral(1.0, 1.0, 1.0, FRAC_PI_2).unwrap(),
            (-1.0f64).exp(),
            max_relative = 1e-15
        );
        let d1 = heat_spectral(1.0, 1.0, 1.0, FRAC_PI_2).unwrap();
        let d2 = heat_spectral(2.0, 1.0, 1.0, FRAC_PI_2 / 2.0).unwrap();
        assert_relative_eq!(d2, d1.powi(4), max_relative = 1e-14);
        assert!(heat_spectral(1.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn quadrature_matches_closed_forms() {
        let c = TestFunction::constant(2.5).unwrap();
        assert_relative_eq!(
            heat_quadrature(&c, 1.0, 3.0, 0.1, 64).unwrap(),
            2.5,
            max_relative = 1e-14
        );

        let s = TestFunction::sine(1.0).unwrap();
        for x in [-1.0, 0.0, 0.7, 2.0] {
            let q = heat_quadrature(&s, 1.0, 1.0, x, 64).unwrap();
            assert!((q - heat_spectral(1.0, 1.0, 1.0, x).unwrap()).abs() < 1e-10);
        }

        let sigma = 0.8;
        let g = TestFunction::gaussian(sigma).unwrap();
        for x in [-2.0, 0.0, 1.5] {
            let (a, t) = (0.9, 0.6);
            let v = sigma * sigma + 2.0 * a * a * t;
            let expect = sigma / v.sqrt() * (-x * x / (2.0 * v)).exp();
            assert!((heat_quadrature(&g, a, t, x, 64).unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn quadrature_rejects_t_zero() {
        let s = TestFunction::sine(1.0).unwrap();
        assert!(matches!(
            heat_quadrature(&s, 1.0, 0.0, 0.0, 64),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn oracle_construction_guards() {
        assert!(SemigroupOracle::heat_quadrature(1.0, 63).is_err());
        assert!(SemigroupOracle::heat_quadrature(1.0, 0).is_err());
        assert!(SemigroupOracle::heat_spectral(0.0).is_err());
        let o = SemigroupOracle::heat_spectral(1.0).unwrap();
        let h = TestFunction::holder_sine(0.5).unwrap();
        assert!(matches!(o.supports(&h), Err(Error::Configuration(_))));
        assert!(o.evolve(&h, 1.0, 0.0).is_err());
    }

    #[test]
    fn heat_semigroup_law_on_grid() {
        let rule = GaussHermite::new(128).unwrap();
        let f = TestFunction::gaussian(1.0).unwrap();
        let (a, t, s) = (1.0, 0.3, 0.5);
        let once = |x: f64| heat_quadrature_with(&rule, &f, a, t + s, x).unwrap();
        let twice = |x: f64| {
            let spread = 2.0 * a * s.sqrt();
            rule.integrate(|y| heat_quadrature_with(&rule, &f, a, t, x + spread * y).unwrap())
                / PI.sqrt()
        };
        for i in 0..41 {
            let x = -6.0 + 0.3 * i as f64;
            assert!((once(x) - twice(x)).abs() < 1e-8, "x={x}");
        }
    }

    #[test]
    fn quadrature_stays_within_range() {
        let rule = GaussHermite::new(64).unwrap();
        let f = TestFunction::holder_sine(0.5).unwrap();
        for i in 0..200 {
            let x = -5.0 + 0.05 * i as f64;
            let v = heat_quadrature_with(&rule, &f, 1.0, 0.2, x).unwrap();
            assert!((-1e-12..=1.0 + 1e-12).contains(&v));
        }
    }
}
