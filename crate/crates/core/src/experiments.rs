//! Convergence-rate harness.
//!
//! The central quantity is the sup-norm error
//! `n ↦ ‖G(t/n)ⁿ f − e^{tL} f‖` at a fixed `t`. The supremum over ℝ is
//! taken as a maximum over a finite grid; for periodic functions one full
//! period is enough, and cusp locations are added to the grid so that
//! Hölder-type errors are not smoothed away by the sampling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chernoff::{ChernoffFamily, RateFunction};
use crate::error::{Error, Result};
use crate::mixture::ShiftMixture;
use crate::semigroups::{Generator, OracleKind, SemigroupOracle};
use crate::testfns::TestFunction;

pub const PERIODIC_GRID_POINTS: usize = 2001;
pub const APERIODIC_GRID_POINTS: usize = 4001;
/// Half-width of the aperiodic grid in units of the evolved profile width.
pub const APERIODIC_HALF_WIDTHS: f64 = 8.0;

/// `ns = 2⁴, 2⁵, …, 2¹²`.
pub fn default_ns() -> Vec<u64> {
    (4..=12).map(|e| 1u64 << e).collect()
}

/// Uniform grid `x_min = x₀ < … < x_{points−1} = x_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingDomain {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

impl SamplingDomain {
    pub fn new(x_min: f64, x_max: f64, points: usize) -> Result<Self> {
        if !(x_min < x_max) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::Domain(format!(
                "sampling domain needs finite x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if points < 2 {
            return Err(Error::Domain(format!(
                "sampling domain needs >= 2 points, got {points}"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            points,
        })
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        let step = (self.x_max - self.x_min) / (self.points - 1) as f64;
        (0..self.points).map(move |i| {
            if i + 1 == self.points {
                self.x_max
            } else {
                self.x_min + step * i as f64
            }
        })
    }

    /// The grid a given function is sampled on when no domain is supplied.
    ///
    /// Periodic functions: one period `[0, p]` with 2001 points. Otherwise
    /// 4001 points over ±8 widths of the evolved profile, centred where the
    /// exact solution peaks (`−t` under translation, `0` under heat).
    pub fn default_for(f: &TestFunction, target: Generator, t: f64) -> Result<Self> {
        if let Some(p) = f.period() {
            return Self::new(0.0, p, PERIODIC_GRID_POINTS);
        }
        let (centre, width) = match target {
            Generator::Translation => (-t, f.scale()),
            Generator::Heat { a } => (0.0, (f.scale().powi(2) + 2.0 * a * a * t).sqrt()),
        };
        let half = APERIODIC_HALF_WIDTHS * width;
        Self::new(centre - half, centre + half, APERIODIC_GRID_POINTS)
    }
}

/// `n ↦ ‖G(t/n)ⁿ f − e^{tL} f‖` at one `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorCurve {
    pub t: f64,
    pub ns: Vec<u64>,
    pub errors: Vec<f64>,
    pub family: String,
    pub function: String,
    pub domain: SamplingDomain,
    pub oracle: OracleKind,
}

/// Least-squares fit of `ln error = intercept − exponent · ln n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub exponent: f64,
    pub log_intercept: f64,
    pub r_squared: f64,
    pub n_range: (u64, u64),
    pub points: usize,
}

fn check_compatible(
    family: &ChernoffFamily,
    oracle: &SemigroupOracle,
    f: &TestFunction,
) -> Result<()> {
    if !family.target().is_compatible(&oracle.generator()) {
        return Err(Error::Configuration(format!(
            "family {} targets {} but the {} oracle evolves {}",
            family.name(),
            family.target(),
            oracle.kind(),
            oracle.generator()
        )));
    }
    oracle.supports(f)
}

/// Grid points plus, for periodic functions with cusps, every `x` at which
/// one of the evaluated arguments `x + s` lands exactly on a cusp.
fn evaluation_points(
    domain: &SamplingDomain,
    f: &TestFunction,
    mixture: &ShiftMixture,
    oracle_shift: Option<f64>,
) -> Vec<f64> {
    let mut xs: Vec<f64> = domain.points().collect();
    if let (Some(period), false) = (f.period(), f.kinks().is_empty()) {
        let shifts = mixture.offsets().chain(oracle_shift);
        for s in shifts {
            for &c in f.kinks() {
                let x = domain.x_min + (c - s - domain.x_min).rem_euclid(period);
                if x <= domain.x_max {
                    xs.push(x);
                }
            }
        }
    }
    xs
}

/// Max over the grid of `|G(t/n)ⁿ f(x) − (e^{tL} f)(x)|`.
///
/// Grid points are evaluated in parallel; the result does not depend on
/// the thread count.
pub fn sup_error(
    family: &ChernoffFamily,
    oracle: &SemigroupOracle,
    f: &TestFunction,
    t: f64,
    n: u64,
    domain: &SamplingDomain,
) -> Result<f64> {
    check_compatible(family, oracle, f)?;
    if !(t > 0.0) {
        return Err(Error::Domain(format!("sup error needs t > 0, got {t}")));
    }
    let mixture = family.chernoff_power(t, n)?;
    let oracle_shift = (oracle.kind() == OracleKind::Translation).then_some(t);
    let xs = evaluation_points(domain, f, &mixture, oracle_shift);
    xs.par_iter()
        .map(|&x| {
            let approx = mixture.apply(f, x)?;
            let exact = oracle.evolve(f, t, x)?;
            let diff = (approx - exact).abs();
            if diff.is_finite() {
                Ok(diff)
            } else {
                Err(Error::Evaluation(format!("error at x={x} is {diff}")))
            }
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

fn check_ns(ns: &[u64]) -> Result<()> {
    if ns.is_empty() || ns[0] == 0 || ns.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::Domain(format!(
            "ns must be non-empty, positive and strictly ascending, got {ns:?}"
        )));
    }
    Ok(())
}

pub fn error_curve(
    family: &ChernoffFamily,
    oracle: &SemigroupOracle,
    f: &TestFunction,
    t: f64,
    ns: &[u64],
    domain: &SamplingDomain,
) -> Result<ErrorCurve> {
    check_ns(ns)?;
    let errors = ns
        .iter()
        .map(|&n| sup_error(family, oracle, f, t, n, domain))
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorCurve {
        t,
        ns: ns.to_vec(),
        errors,
        family: family.name().to_string(),
        function: f.name().to_string(),
        domain: *domain,
        oracle: oracle.kind(),
    })
}

/// Power-law fit on the points with `n ≥ n_min_cut` and a strictly
/// positive error. Zero errors are discarded, not clamped.
pub fn fit_power_law(ns: &[u64], errors: &[f64], n_min_cut: u64) -> Result<RateFit> {
    let pts: Vec<(u64, f64, f64)> = ns
        .iter()
        .zip(errors)
        .filter(|(&n, &e)| n >= n_min_cut && e > 0.0 && e.is_finite())
        .map(|(&n, &e)| (n, (n as f64).ln(), e.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::DegenerateFit { usable: pts.len() });
    }
    let m = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let mean_y = pts.iter().map(|p| p.2).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.1 - mean_x).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.1 - mean_x) * (p.2 - mean_y)).sum();
    let syy: f64 = pts.iter().map(|p| (p.2 - mean_y).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.2 - intercept - slope * p.1).powi(2))
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(RateFit {
        exponent: -slope,
        log_intercept: intercept,
        r_squared,
        n_range: (pts[0].0, pts[pts.len() - 1].0),
        points: pts.len(),
    })
}

pub fn fit_rate(curve: &ErrorCurve, n_min_cut: u64) -> Result<RateFit> {
    fit_power_law(&curve.ns, &curve.errors, n_min_cut)
}

/// Result of [`subspace_probe`].
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceProbe {
    pub bounded: bool,
    pub sup_ratio: f64,
    /// `max_{t∈τ} error(n) / w(n)` for each n.
    pub ratios: Vec<f64>,
}

/// Empirical `sup_{t∈τ} error(n) = O(w(n))` verdict over the curves' t
/// values.
///
/// The verdict is a heuristic: `bounded` holds when every ratio in the last
/// third of the n-grid is at most twice the median ratio over the whole
/// grid.
pub fn subspace_probe(curves: &[ErrorCurve], w: &RateFunction) -> Result<SubspaceProbe> {
    let first = curves
        .first()
        .ok_or_else(|| Error::Domain("subspace probe needs at least one curve".into()))?;
    if curves
        .iter()
        .any(|c| c.ns != first.ns || c.family != first.family || c.function != first.function)
    {
        return Err(Error::Configuration(
            "subspace probe curves must share ns, family and function".into(),
        ));
    }
    let ratios: Vec<f64> = first
        .ns
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let r = curves.iter().map(|c| c.errors[i]).fold(0.0, f64::max);
            let wn = w.eval(n as f64);
            if r == 0.0 {
                0.0
            } else if wn == 0.0 {
                f64::INFINITY
            } else {
                r / wn
            }
        })
        .collect();
    let sup_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let med = median(&ratios);
    let tail_len = ratios.len().div_ceil(3);
    let tail = &ratios[ratios.len() - tail_len..];
    let bounded = sup_ratio.is_finite() && tail.iter().all(|&r| r <= 2.0 * med);
    Ok(SubspaceProbe {
        bounded,
        sup_ratio,
        ratios,
    })
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearityRow {
    pub n: u64,
    pub error_combined: f64,
    pub error_f: f64,
    pub error_g: f64,
    pub violation: f64,
}

/// Result of [`linearity_check`]; `scale` is `1 + max_n(|α|e_f + |β|e_g)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearityCheck {
    pub max_violation: f64,
    pub scale: f64,
    pub rows: Vec<LinearityRow>,
}

/// Triangle-inequality check
/// `e(αf + βg) ≤ |α| e(f) + |β| e(g)` across `ns`, all three errors taken on
/// the same grid.
#[allow(clippy::too_many_arguments)]
pub fn linearity_check(
    family: &ChernoffFamily,
    oracle: &SemigroupOracle,
    f: &TestFunction,
    g: &TestFunction,
    alpha: f64,
    beta: f64,
    t: f64,
    ns: &[u64],
    domain: &SamplingDomain,
) -> Result<LinearityCheck> {
    check_ns(ns)?;
    let h = TestFunction::linear_combination(alpha, f, beta, g);
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let eh = sup_error(family, oracle, &h, t, n, domain)?;
        let ef = sup_error(family, oracle, f, t, n, domain)?;
        let eg = sup_error(family, oracle, g, t, n, domain)?;
        rows.push(LinearityRow {
            n,
            error_combined: eh,
            error_f: ef,
            error_g: eg,
            violation: eh - alpha.abs() * ef - beta.abs() * eg,
        });
    }
    let max_violation = rows
        .iter()
        .map(|r| r.violation)
        .fold(f64::NEG_INFINITY, f64::max);
    let scale = 1.0
        + rows
            .iter()
            .map(|r| alpha.abs() * r.error_f + beta.abs() * r.error_g)
            .fold(0.0, f64::max);
    Ok(LinearityCheck {
        max_violation,
        scale,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlowRow {
    pub n: u64,
    pub error: f64,
    pub lower_bound: f64,
}

/// Result of [`slow_convergence_experiment`].
#[derive(Debug, Clone, PartialEq)]
pub struct SlowConvergence {
    /// Smallest probed `n₀` with `error(n) ≥ ½ t w(n/t)` for every probed
    /// `n > n₀`.
    pub n0: Option<u64>,
    pub holds: bool,
    pub rows: Vec<SlowRow>,
}

/// Runs `G(t)f(x) = f(x + t + t w(1/t))` on `f = sin` against translation
/// and checks the lower bound `error ≥ ½ t w(n/t)` on the probed n.
pub fn slow_convergence_experiment(
    w: &RateFunction,
    t: f64,
    ns: &[u64],
    domain: &SamplingDomain,
) -> Result<SlowConvergence> {
    check_ns(ns)?;
    let family = ChernoffFamily::perturbed_shift(w.clone());
    let oracle = SemigroupOracle::translation();
    let f = TestFunction::sine(1.0)?;
    let rows = ns
        .iter()
        .map(|&n| {
            Ok(SlowRow {
                n,
                error: sup_error(&family, &oracle, &f, t, n, domain)?,
                lower_bound: 0.5 * t * w.eval(n as f64 / t),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let last_violation = rows.iter().rposition(|r| r.error < r.lower_bound);
    let (n0, holds) = match last_violation {
        None => (Some(rows[0].n), true),
        Some(i) if i + 1 < rows.len() => (Some(rows[i].n), true),
        Some(_) => (None, false),
    };
    Ok(SlowConvergence { n0, holds, rows })
}

/// Caps the global rayon pool from `CHERNOFF_LAB_THREADS`, if set.
pub fn configure_threads_from_env() -> Result<Option<usize>> {
    let Ok(raw) = std::env::var("CHERNOFF_LAB_THREADS") else {
        return Ok(None);
    };
    let threads: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::Usage(format!(
            "CHERNOFF_LAB_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    // a pool already built (e.g. by an earlier call) keeps its size
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(Some(threads))
}
