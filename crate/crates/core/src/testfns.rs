//! Bounded, uniformly continuous test functions on ℝ.
//!
//! Each function carries the metadata the experiments need: period,
//! Hölder bound, derivatives for the tangency probe, and the closed-form
//! heat evolution when one is known.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// `(a, t, x) ↦ (e^{t a² ∂²} f)(x)`.
pub type HeatFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// Names accepted by [`TestFunction::parse`], with their parameter.
pub const CATALOG: &[(&str, &str)] = &[
    ("sine:k", "sin(k x), k != 0"),
    ("gaussian:sigma", "exp(-x^2 / (2 sigma^2)), sigma > 0"),
    ("holder_sine:alpha", "|sin x|^alpha, 0 < alpha <= 1"),
    ("const:c", "constant c"),
];

/// `|f(x) − f(y)| ≤ constant · |x − y|^alpha`, with the constant obtained
/// from `samples` sampled pairs (or analytically when `samples == 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderBound {
    pub alpha: f64,
    pub constant: f64,
    pub samples: usize,
}

#[derive(Clone)]
pub struct TestFunction {
    name: String,
    eval: RealFn,
    period: Option<f64>,
    holder: Option<HolderBound>,
    smooth: bool,
    deriv: Option<RealFn>,
    deriv2: Option<RealFn>,
    heat_closed_form: Option<HeatFn>,
    kinks: Vec<f64>,
    scale: f64,
    sup_norm: f64,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("period", &self.period)
            .field("holder", &self.holder)
            .field("smooth", &self.smooth)
            .field("kinks", &self.kinks)
            .finish_non_exhaustive()
    }
}

impl TestFunction {
    /// `sin(kx)`.
    pub fn sine(k: f64) -> Result<Self> {
        if k == 0.0 || !k.is_finite() {
            return Err(Error::Construction(format!(
                "sine frequency must be finite and non-zero, got {k} (use const:0 instead)"
            )));
        }
        Ok(Self {
            name: format!("sine:{k}"),
            eval: Arc::new(move |x| (k * x).sin()),
            period: Some(2.0 * PI / k.abs()),
            holder: Some(HolderBound {
                alpha: 1.0,
                constant: k.abs(),
                samples: 0,
            }),
            smooth: true,
            deriv: Some(Arc::new(move |x| k * (k * x).cos())),
            deriv2: Some(Arc::new(move |x| -k * k * (k * x).sin())),
            heat_closed_form: Some(Arc::new(move |a, t, x| {
                (-a * a * k * k * t).exp() * (k * x).sin()
            })),
            kinks: Vec::new(),
            scale: 1.0 / k.abs(),
            sup_norm: 1.0,
        })
    }

    /// `exp(−x²/(2σ²))`.
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Construction(format!(
                "gaussian width must be positive, got {sigma}"
            )));
        }
        let s2 = sigma * sigma;
        Ok(Self {
            name: format!("gaussian:{sigma}"),
            eval: Arc::new(move |x| (-x * x / (2.0 * s2)).exp()),
            period: None,
            holder: Some(HolderBound {
                alpha: 1.0,
                constant: (-0.5f64).exp() / sigma,
                samples: 0,
            }),
            smooth: true,
            deriv: Some(Arc::new(move |x| -x / s2 * (-x * x / (2.0 * s2)).exp())),
            deriv2: Some(Arc::new(move |x| {
                (x * x / s2 - 1.0) / s2 * (-x * x / (2.0 * s2)).exp()
            })),
            heat_closed_form: Some(Arc::new(move |a, t, x| {
                let v = s2 + 2.0 * a * a * t;
                (s2 / v).sqrt() * (-x * x / (2.0 * v)).exp()
            })),
            kinks: Vec::new(),
            scale: sigma,
            sup_norm: 1.0,
        })
    }

    /// `|sin x|^α`, periodic with period π and a cusp at every multiple of π.
    pub fn holder_sine(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Construction(format!(
                "holder_sine exponent must lie in (0, 1], got {alpha}"
            )));
        }
        let eval: RealFn = Arc::new(move |x: f64| x.sin().abs().powf(alpha));
        let (constant, samples) = certify_holder_constant(&*eval, alpha, PI, &[0.0]);
        Ok(Self {
            name: format!("holder_sine:{alpha}"),
            eval,
            period: Some(PI),
            holder: Some(HolderBound {
                alpha,
                constant,
                samples,
            }),
            smooth: false,
            deriv: None,
            deriv2: None,
            heat_closed_form: None,
            kinks: vec![0.0],
            scale: 1.0,
            sup_norm: 1.0,
        })
    }

    pub fn constant(c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::Construction(format!(
                "constant must be finite, got {c}"
            )));
        }
        Ok(Self {
            name: format!("const:{c}"),
            eval: Arc::new(move |_| c),
            period: None,
            holder: Some(HolderBound {
                alpha: 1.0,
                constant: 0.0,
                samples: 0,
            }),
            smooth: true,
            deriv: Some(Arc::new(|_| 0.0)),
            deriv2: Some(Arc::new(|_| 0.0)),
            heat_closed_form: Some(Arc::new(move |_, _, _| c)),
            kinks: Vec::new(),
            scale: 1.0,
            sup_norm: c.abs(),
        })
    }

    /// Parses a catalog name such as `sine:1` or `holder_sine:0.5`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, param) = spec.split_once(':').ok_or_else(|| unknown_function(spec))?;
        let value: f64 = param.trim().parse().map_err(|_| {
            Error::Usage(format!("bad parameter {param:?} in function spec {spec:?}"))
        })?;
        match name.trim() {
            "sine" => Self::sine(value),
            "gaussian" => Self::gaussian(value),
            "holder_sine" => Self::holder_sine(value),
            "const" => Self::constant(value),
            _ => Err(unknown_function(spec)),
        }
    }

    /// Pointwise `α f + β g`. Metadata is kept where it survives the
    /// combination (closed-form heat evolution, common period, smoothness).
    pub fn linear_combination(alpha: f64, f: &Self, beta: f64, g: &Self) -> Self {
        let (fe, ge) = (f.eval.clone(), g.eval.clone());
        let heat = match (&f.heat_closed_form, &g.heat_closed_form) {
            (Some(fh), Some(gh)) => {
                let (fh, gh) = (fh.clone(), gh.clone());
                Some(Arc::new(move |a, t, x| alpha * fh(a, t, x) + beta * gh(a, t, x)) as HeatFn)
            }
            _ => None,
        };
        let combine = |df: &Option<RealFn>, dg: &Option<RealFn>| match (df, dg) {
            (Some(df), Some(dg)) => {
                let (df, dg) = (df.clone(), dg.clone());
                Some(Arc::new(move |x| alpha * df(x) + beta * dg(x)) as RealFn)
            }
            _ => None,
        };
        let period = match (f.period, g.period) {
            (Some(p), Some(q)) if p == q => Some(p),
            _ => None,
        };
        let mut kinks = f.kinks.clone();
        kinks.extend(&g.kinks);
        Self {
            name: format!("{alpha}*{}+{beta}*{}", f.name, g.name),
            eval: Arc::new(move |x| alpha * fe(x) + beta * ge(x)),
            period,
            holder: None,
            smooth: f.smooth && g.smooth,
            deriv: combine(&f.deriv, &g.deriv),
            deriv2: combine(&f.deriv2, &g.deriv2),
            heat_closed_form: heat,
            kinks: if period.is_some() { kinks } else { Vec::new() },
            scale: f.scale.max(g.scale),
            sup_norm: alpha.abs() * f.sup_norm + beta.abs() * g.sup_norm,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn period(&self) -> Option<f64> {
        self.period
    }

    pub fn holder(&self) -> Option<HolderBound> {
        self.holder
    }

    pub fn is_smooth(&self) -> bool {
        self.smooth
    }

    pub fn deriv(&self, x: f64) -> Option<f64> {
        self.deriv.as_ref().map(|d| d(x))
    }

    pub fn deriv2(&self, x: f64) -> Option<f64> {
        self.deriv2.as_ref().map(|d| d(x))
    }

    pub fn has_heat_closed_form(&self) -> bool {
        self.heat_closed_form.is_some()
    }

    /// Exact heat evolution `(e^{t a² ∂²} f)(x)`, when known.
    pub fn heat_closed_form(&self, a: f64, t: f64, x: f64) -> Option<f64> {
        self.heat_closed_form.as_ref().map(|h| h(a, t, x))
    }

    /// Points (taken modulo the period) where the function is not
    /// differentiable.
    pub fn kinks(&self) -> &[f64] {
        &self.kinks
    }

    /// Characteristic spatial width (σ for Gaussians, 1/|k| for sines).
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// An upper bound on `sup |f|`.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// The generator action `f′` of the translation semigroup.
    pub fn translation_generator(&self) -> Option<Self> {
        let d = self.deriv.clone()?;
        Some(Self::from_fn(format!("d/dx {}", self.name), move |x| d(x)))
    }

    /// The generator action `a² f″` of the heat semigroup.
    pub fn heat_generator(&self, a: f64) -> Option<Self> {
        let d2 = self.deriv2.clone()?;
        Some(Self::from_fn(
            format!("{a}^2 d2/dx2 {}", self.name),
            move |x| a * a * d2(x),
        ))
    }

    /// A bare function with no metadata beyond its name.
    pub fn from_fn<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            eval: Arc::new(f),
            period: None,
            holder: None,
            smooth: false,
            deriv: None,
            deriv2: None,
            heat_closed_form: None,
            kinks: Vec::new(),
            scale: 1.0,
            sup_norm: f64::INFINITY,
        }
    }
}

fn unknown_function(spec: &str) -> Error {
    let names: Vec<&str> = CATALOG.iter().map(|(n, _)| *n).collect();
    Error::Usage(format!(
        "unknown function {spec:?}; catalog: {}",
        names.join(", ")
    ))
}

/// Largest sampled `|f(x) − f(y)| / |x − y|^α` over base points covering one
/// period (plus the given kinks) and log-spaced gaps from 1e−9 to the
/// period. Returns the constant, padded by a relative 1e−9, and the number
/// of pairs examined.
pub fn certify_holder_constant(
    f: &dyn Fn(f64) -> f64,
    alpha: f64,
    period: f64,
    kinks: &[f64],
) -> (f64, usize) {
    const BASES: usize = 2001;
    const GAPS: usize = 64;
    let mut bases: Vec<f64> = (0..BASES)
        .map(|i| period * i as f64 / (BASES - 1) as f64)
        .collect();
    bases.extend_from_slice(kinks);
    let (lo, hi) = (1e-9f64.ln(), period.ln());
    let mut best = 0.0f64;
    let mut samples = 0;
    for g in 0..GAPS {
        let h = (lo + (hi - lo) * g as f64 / (GAPS - 1) as f64).exp();
        let denom = h.powf(alpha);
        for &x in &bases {
            for y in [x + h, x - h] {
                best = best.max((f(x) - f(y)).abs() / denom);
                samples += 1;
            }
        }
    }
    (best * (1.0 + 1e-9), samples)
}
