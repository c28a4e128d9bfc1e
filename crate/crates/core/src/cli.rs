//! Config-driven experiment runner behind the `chernoff-lab` binary.
//!
//! A run reads a flat JSON [`ExperimentConfig`] and writes two files next to
//! the configured output prefix: `<output>.csv` with the raw numbers and
//! `<output>.report.txt` with fitted rates, verdicts and the echoed config.
//! Floats in the CSV are written with 17 significant digits so identical
//! configs give byte-identical tables.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::chernoff::{self, ChernoffFamily, RateFunction};
use crate::error::{Error, Result};
use crate::experiments::{self, ErrorCurve, SamplingDomain};
use crate::semigroups::{Generator, OracleKind, SemigroupOracle, DEFAULT_QUADRATURE_NODES};
use crate::testfns::{self, TestFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Rates,
    Compare,
    Slow,
    Tangency,
    Moments,
    Subspace,
    Linearity,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Rates,
        ExperimentKind::Compare,
        ExperimentKind::Slow,
        ExperimentKind::Tangency,
        ExperimentKind::Moments,
        ExperimentKind::Subspace,
        ExperimentKind::Linearity,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Rates => "rates",
            ExperimentKind::Compare => "compare",
            ExperimentKind::Slow => "slow",
            ExperimentKind::Tangency => "tangency",
            ExperimentKind::Moments => "moments",
            ExperimentKind::Subspace => "subspace",
            ExperimentKind::Linearity => "linearity",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown experiment kind {s:?}")))
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Flat JSON experiment description.
///
/// `family` is a comma-separated list for `compare`; `function` is a
/// `f,g` pair for `linearity`. The sampling grid is either fully given
/// (`x_min`, `x_max`, `points`) or chosen per function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub family: String,
    pub function: String,
    pub a: f64,
    pub t: Vec<f64>,
    #[serde(default)]
    pub ns: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    pub output: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kmax: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_min_cut: Option<u64>,
}

impl ExperimentConfig {
    /// A ready-to-run template for each experiment kind.
    pub fn template(kind: ExperimentKind) -> Self {
        let mut cfg = Self {
            kind,
            family: "heat_G".into(),
            function: "sine:1".into(),
            a: 1.0,
            t: vec![1.0],
            ns: experiments::default_ns(),
            x_min: None,
            x_max: None,
            points: None,
            output: format!("out/{kind}"),
            oracle: None,
            nodes: None,
            kmax: None,
            rate: None,
            alpha: None,
            beta: None,
            n_min_cut: None,
        };
        match kind {
            ExperimentKind::Rates => {}
            ExperimentKind::Compare => cfg.family = "heat_G,heat_S".into(),
            ExperimentKind::Slow => {
                cfg.family = "perturbed_shift:inv_log".into();
                cfg.rate = Some("inv_log".into());
            }
            ExperimentKind::Tangency => {
                cfg.t = (1..=5).map(|e| 10f64.powi(-e)).collect();
                cfg.ns = Vec::new();
            }
            ExperimentKind::Moments => {
                cfg.family = "heat_S".into();
                cfg.kmax = Some(8);
                cfg.ns = Vec::new();
            }
            ExperimentKind::Subspace => {
                cfg.family = "quadratic_shift:1".into();
                cfg.function = "holder_sine:0.5".into();
                cfg.t = vec![0.5, 1.0];
                cfg.rate = Some("power:0.5".into());
            }
            ExperimentKind::Linearity => {
                cfg.function = "sine:1,gaussian:1".into();
                cfg.alpha = Some(2.0);
                cfg.beta = Some(-3.0);
            }
        }
        cfg
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("{}: {e}", path.display()),
            ))
        })?;
        Self::from_json(&text)
    }

    fn usage(field: &str, msg: impl fmt::Display) -> Error {
        Error::Usage(format!("config field `{field}`: {msg}"))
    }

    /// Checks the kind-specific required fields and value ranges.
    pub fn validate(&self) -> Result<()> {
        if self.t.is_empty() {
            return Err(Self::usage("t", "needs at least one time"));
        }
        if let Some(bad) = self.t.iter().find(|&&t| !(t > 0.0) || !t.is_finite()) {
            return Err(Self::usage(
                "t",
                format!("times must be positive, got {bad}"),
            ));
        }
        if !(self.a > 0.0) || !self.a.is_finite() {
            return Err(Self::usage(
                "a",
                format!("must be positive, got {}", self.a),
            ));
        }
        if self.output.trim().is_empty() {
            return Err(Self::usage("output", "must not be empty"));
        }
        let needs_ns = !matches!(
            self.kind,
            ExperimentKind::Tangency | ExperimentKind::Moments
        );
        let bad_ns =
            self.ns.is_empty() || self.ns[0] == 0 || self.ns.windows(2).any(|p| p[1] <= p[0]);
        if needs_ns && bad_ns {
            return Err(Self::usage(
                "ns",
                "must be non-empty, positive and strictly ascending",
            ));
        }
        match (self.x_min, self.x_max, self.points) {
            (None, None, None) => {}
            (Some(lo), Some(hi), Some(p)) => {
                SamplingDomain::new(lo, hi, p).map_err(|e| Self::usage("x_min/x_max/points", e))?;
            }
            _ => return Err(Self::usage("x_min/x_max/points", "give all three or none")),
        }
        if let Some(n) = self.nodes {
            if n < 2 || n % 2 != 0 {
                return Err(Self::usage("nodes", "must be even and >= 2"));
            }
        }
        match self.kind {
            ExperimentKind::Compare if self.family_specs().len() < 2 => Err(Self::usage(
                "family",
                "compare needs at least two comma-separated families",
            )),
            ExperimentKind::Slow | ExperimentKind::Subspace if self.rate.is_none() => {
                Err(Self::usage("rate", format!("required for {}", self.kind)))
            }
            ExperimentKind::Moments if self.kmax.is_none() => {
                Err(Self::usage("kmax", "required for moments"))
            }
            ExperimentKind::Linearity => {
                if self.function_specs().len() != 2 {
                    Err(Self::usage(
                        "function",
                        "linearity needs exactly two functions `f,g`",
                    ))
                } else if self.alpha.is_none() || self.beta.is_none() {
                    Err(Self::usage("alpha/beta", "required for linearity"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    fn family_specs(&self) -> Vec<&str> {
        split_list(&self.family)
    }

    fn function_specs(&self) -> Vec<&str> {
        split_list(&self.function)
    }

    fn explicit_domain(&self) -> Option<SamplingDomain> {
        match (self.x_min, self.x_max, self.points) {
            (Some(lo), Some(hi), Some(p)) => SamplingDomain::new(lo, hi, p).ok(),
            _ => None,
        }
    }

    fn domain_for(&self, f: &TestFunction, target: Generator, t: f64) -> Result<SamplingDomain> {
        match self.explicit_domain() {
            Some(d) => Ok(d),
            None => SamplingDomain::default_for(f, target, t),
        }
    }

    fn oracle_for(&self, target: Generator, f: &TestFunction) -> Result<SemigroupOracle> {
        let nodes = self.nodes.unwrap_or(DEFAULT_QUADRATURE_NODES);
        match (target, self.oracle) {
            (Generator::Translation, None | Some(OracleKind::Translation)) => {
                Ok(SemigroupOracle::translation())
            }
            (Generator::Heat { a }, Some(OracleKind::HeatSpectral)) => {
                SemigroupOracle::heat_spectral(a)
            }
            (Generator::Heat { a }, Some(OracleKind::HeatQuadrature)) => {
                SemigroupOracle::heat_quadrature(a, nodes)
            }
            (Generator::Heat { a }, None) if f.has_heat_closed_form() => {
                SemigroupOracle::heat_spectral(a)
            }
            (Generator::Heat { a }, None) => SemigroupOracle::heat_quadrature(a, nodes),
            (target, Some(kind)) => Err(Self::usage(
                "oracle",
                format!("{kind} cannot evolve generator {target}"),
            )),
        }
    }
}

fn split_list(s: &str) -> Vec<&str> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .collect()
}

/// Paths written by [`run`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub csv: PathBuf,
    pub report: PathBuf,
}

/// `{:.16e}`: 17 significant digits, locale-independent.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

struct Table {
    csv: String,
    report: String,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            csv: format!("{}\n", header.join(",")),
            report: String::new(),
        }
    }

    fn row(&mut self, cells: &[String]) {
        self.csv.push_str(&cells.join(","));
        self.csv.push('\n');
    }

    fn line(&mut self, text: impl AsRef<str>) {
        self.report.push_str(text.as_ref());
        self.report.push('\n');
    }
}

/// Validates the config, runs the experiment and writes the CSV and report.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let table = match config.kind {
        ExperimentKind::Rates => run_rates(config)?,
        ExperimentKind::Compare => run_compare(config)?,
        ExperimentKind::Slow => run_slow(config)?,
        ExperimentKind::Tangency => run_tangency(config)?,
        ExperimentKind::Moments => run_moments(config)?,
        ExperimentKind::Subspace => run_subspace(config)?,
        ExperimentKind::Linearity => run_linearity(config)?,
    };
    let csv = PathBuf::from(format!("{}.csv", config.output));
    let report = PathBuf::from(format!("{}.report.txt", config.output));
    if let Some(dir) = csv.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(&csv, &table.csv)?;
    let mut text = format!(
        "chernoff-lab {} report\n\nconfig:\n{}\n\n",
        config.kind,
        config.to_json()
    );
    text.push_str(&table.report);
    fs::write(&report, text)?;
    Ok(RunOutput { csv, report })
}

fn single_family(config: &ExperimentConfig) -> Result<ChernoffFamily> {
    ChernoffFamily::parse(&config.family, config.a)
}

fn single_function(config: &ExperimentConfig) -> Result<TestFunction> {
    TestFunction::parse(&config.function)
}

fn describe_fit(curve: &ErrorCurve, cut: u64) -> String {
    match experiments::fit_rate(curve, cut) {
        Ok(fit) => format!(
            "fitted exponent p = {:.4} (r^2 = {:.6}, n in [{}, {}], {} points)",
            fit.exponent, fit.r_squared, fit.n_range.0, fit.n_range.1, fit.points
        ),
        Err(Error::DegenerateFit { usable }) => {
            format!("no fit: {usable} positive errors (exact or below measurable precision)")
        }
        Err(e) => format!("no fit: {e}"),
    }
}

fn run_rates(config: &ExperimentConfig) -> Result<Table> {
    let family = single_family(config)?;
    let f = single_function(config)?;
    let oracle = config.oracle_for(family.target(), &f)?;
    let cut = config.n_min_cut.unwrap_or(1);
    let mut table = Table::new(&["t", "n", "error"]);
    table.line(format!(
        "family {} | function {} | oracle {}",
        family.name(),
        f.name(),
        oracle.kind()
    ));
    for &t in &config.t {
        let domain = config.domain_for(&f, family.target(), t)?;
        let curve = experiments::error_curve(&family, &oracle, &f, t, &config.ns, &domain)?;
        for (n, e) in curve.ns.iter().zip(&curve.errors) {
            table.row(&[fmt_float(t), n.to_string(), fmt_float(*e)]);
        }
        table.line(format!("t = {t}: {}", describe_fit(&curve, cut)));
    }
    Ok(table)
}

fn run_compare(config: &ExperimentConfig) -> Result<Table> {
    let families = config
        .family_specs()
        .into_iter()
        .map(|s| ChernoffFamily::parse(s, config.a))
        .collect::<Result<Vec<_>>>()?;
    let f = single_function(config)?;
    let cut = config.n_min_cut.unwrap_or(1);
    let mut header = vec!["t".to_string(), "n".to_string()];
    header.extend(families.iter().map(|fam| fam.name().to_string()));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut table = Table::new(&header_refs);
    table.line(format!("function {}", f.name()));
    for &t in &config.t {
        let mut curves = Vec::new();
        for fam in &families {
            let oracle = config.oracle_for(fam.target(), &f)?;
            let domain = config.domain_for(&f, fam.target(), t)?;
            curves.push(experiments::error_curve(
                fam, &oracle, &f, t, &config.ns, &domain,
            )?);
        }
        for (i, n) in config.ns.iter().enumerate() {
            let mut cells = vec![fmt_float(t), n.to_string()];
            cells.extend(curves.iter().map(|c| fmt_float(c.errors[i])));
            table.row(&cells);
        }
        table.line(format!("t = {t}:"));
        let mut best: Option<(f64, &str)> = None;
        for c in &curves {
            table.line(format!("  {}: {}", c.family, describe_fit(c, cut)));
            if let Ok(fit) = experiments::fit_rate(c, cut) {
                if best.is_none_or(|(p, _)| fit.exponent > p) {
                    best = Some((fit.exponent, &c.family));
                }
            }
        }
        if let Some((p, name)) = best {
            table.line(format!("  larger fitted exponent: {name} (p = {p:.4})"));
        }
        for (i, a) in curves.iter().enumerate() {
            for b in curves.iter().skip(i + 1) {
                let a_wins = a.errors.iter().zip(&b.errors).all(|(x, y)| x < y);
                let b_wins = a.errors.iter().zip(&b.errors).all(|(x, y)| y < x);
                let verdict = match (a_wins, b_wins) {
                    (true, _) => format!("{} error is smaller at every n", a.family),
                    (_, true) => format!("{} error is smaller at every n", b.family),
                    _ => "neither family is uniformly smaller".to_string(),
                };
                table.line(format!("  {} vs {}: {verdict}", a.family, b.family));
            }
        }
    }
    Ok(table)
}

fn run_slow(config: &ExperimentConfig) -> Result<Table> {
    let w = RateFunction::parse(config.rate.as_deref().unwrap_or_default())?;
    let f = TestFunction::sine(1.0)?;
    let mut table = Table::new(&["t", "n", "error", "lower_bound"]);
    table.line(format!(
        "perturbed_shift with rate {} on sine:1",
        w.description()
    ));
    for &t in &config.t {
        let domain = config.domain_for(&f, Generator::Translation, t)?;
        let res = experiments::slow_convergence_experiment(&w, t, &config.ns, &domain)?;
        for r in &res.rows {
            table.row(&[
                fmt_float(t),
                r.n.to_string(),
                fmt_float(r.error),
                fmt_float(r.lower_bound),
            ]);
        }
        let ns: Vec<u64> = res.rows.iter().map(|r| r.n).collect();
        let errs: Vec<f64> = res.rows.iter().map(|r| r.error).collect();
        let fit = experiments::fit_power_law(&ns, &errs, config.n_min_cut.unwrap_or(1))
            .map(|p| format!("{:.4}", p.exponent))
            .unwrap_or_else(|e| e.to_string());
        table.line(format!(
            "t = {t}: lower bound error >= t w(n/t)/2 {} (n0 = {}); fitted exponent {fit}",
            if res.holds { "holds" } else { "fails" },
            res.n0.map_or("none".to_string(), |n| n.to_string()),
        ));
    }
    Ok(table)
}

fn run_tangency(config: &ExperimentConfig) -> Result<Table> {
    let family = single_family(config)?;
    let f = single_function(config)?;
    let lf = match family.target() {
        Generator::Translation => f.translation_generator(),
        Generator::Heat { a } => f.heat_generator(a),
    }
    .ok_or_else(|| {
        Error::Configuration(format!("{} has no closed-form generator action", f.name()))
    })?;
    let domain = config.domain_for(&f, family.target(), config.t[0])?;
    let residuals = chernoff::tangency_check(&family, &f, &lf, &config.t, &domain)?;
    let mut table = Table::new(&["t", "residual"]);
    for (t, r) in config.t.iter().zip(&residuals) {
        table.row(&[fmt_float(*t), fmt_float(*r)]);
    }
    let monotone = residuals.windows(2).all(|p| p[1] <= 1.1 * p[0]);
    let ratio = residuals[residuals.len() - 1] / residuals[0];
    table.line(format!(
        "family {} | function {} | Lf = {}",
        family.name(),
        f.name(),
        lf.name()
    ));
    table.line(format!("residuals non-increasing (10% slack): {monotone}"));
    table.line(format!("final / first residual: {}", fmt_float(ratio)));
    let growth = chernoff::norm_growth_check(&family, &config.t, 0.0)?;
    table.line(format!(
        "norm growth: omega estimate {} ({} for omega = 0)",
        fmt_float(growth.omega_estimate),
        if growth.satisfied {
            "satisfied"
        } else {
            "violated"
        }
    ));
    Ok(table)
}

fn run_moments(config: &ExperimentConfig) -> Result<Table> {
    let family = single_family(config)?;
    let t = config.t[0];
    let kmax = config.kmax.unwrap_or(8);
    let res = chernoff::moment_match_order(&family, config.a, t, kmax)?;
    let mut table = Table::new(&["k", "moment", "gaussian", "matches"]);
    for r in &res.rows {
        table.row(&[
            r.k.to_string(),
            fmt_float(r.moment),
            fmt_float(r.gaussian),
            r.matches.to_string(),
        ]);
    }
    table.line(format!(
        "family {} | a = {} | t = {t} | kmax = {kmax}",
        family.name(),
        config.a
    ));
    match (res.first_mismatch, res.predicted_exponent) {
        (Some(k), Some(p)) => {
            table.line(format!("first mismatch k = {k}"));
            table.line(format!(
                "predicted exponent {p} (error ~ C n^-{p}; a prediction, not a theorem)"
            ));
        }
        _ => table.line(format!(
            "all moments up to k = {kmax} match the heat kernel"
        )),
    }
    Ok(table)
}

fn run_subspace(config: &ExperimentConfig) -> Result<Table> {
    let family = single_family(config)?;
    let f = single_function(config)?;
    let w = RateFunction::parse(config.rate.as_deref().unwrap_or_default())?;
    let oracle = config.oracle_for(family.target(), &f)?;
    let curves = config
        .t
        .iter()
        .map(|&t| {
            let domain = config.domain_for(&f, family.target(), t)?;
            experiments::error_curve(&family, &oracle, &f, t, &config.ns, &domain)
        })
        .collect::<Result<Vec<_>>>()?;
    let probe = experiments::subspace_probe(&curves, &w)?;
    let mut table = Table::new(&["n", "max_error", "w", "ratio"]);
    for (i, &n) in config.ns.iter().enumerate() {
        let r = curves.iter().map(|c| c.errors[i]).fold(0.0, f64::max);
        table.row(&[
            n.to_string(),
            fmt_float(r),
            fmt_float(w.eval(n as f64)),
            fmt_float(probe.ratios[i]),
        ]);
    }
    table.line(format!(
        "family {} | function {} | w = {} | tau = {:?}",
        family.name(),
        f.name(),
        w.description(),
        config.t
    ));
    table.line(format!(
        "empirical O(w(n)) verdict (tail <= 2 x median heuristic): {}",
        if probe.bounded {
            "bounded"
        } else {
            "unbounded"
        }
    ));
    table.line(format!("sup ratio: {}", fmt_float(probe.sup_ratio)));
    Ok(table)
}

fn run_linearity(config: &ExperimentConfig) -> Result<Table> {
    let family = single_family(config)?;
    let specs = config.function_specs();
    let f = TestFunction::parse(specs[0])?;
    let g = TestFunction::parse(specs[1])?;
    let (alpha, beta) = (config.alpha.unwrap_or(1.0), config.beta.unwrap_or(1.0));
    let h = TestFunction::linear_combination(alpha, &f, beta, &g);
    let oracle = config.oracle_for(family.target(), &h)?;
    let mut table = Table::new(&["t", "n", "error_h", "error_f", "error_g", "violation"]);
    table.line(format!("family {} | h = {}", family.name(), h.name()));
    for &t in &config.t {
        let domain = config.domain_for(&h, family.target(), t)?;
        let check = experiments::linearity_check(
            &family, &oracle, &f, &g, alpha, beta, t, &config.ns, &domain,
        )?;
        for r in &check.rows {
            table.row(&[
                fmt_float(t),
                r.n.to_string(),
                fmt_float(r.error_combined),
                fmt_float(r.error_f),
                fmt_float(r.error_g),
                fmt_float(r.violation),
            ]);
        }
        table.line(format!(
            "t = {t}: max violation {} (scale {}); triangle inequality {}",
            fmt_float(check.max_violation),
            fmt_float(check.scale),
            if check.max_violation <= 1e-10 * check.scale {
                "holds"
            } else {
                "violated"
            }
        ));
    }
    Ok(table)
}

/// Text printed by `chernoff-lab list`.
pub fn catalog_listing() -> String {
    let mut out = String::from("families:\n");
    for (name, desc) in chernoff::CATALOG {
        let _ = writeln!(out, "  {name:<26} {desc}");
    }
    out.push_str("functions:\n");
    for (name, desc) in testfns::CATALOG {
        let _ = writeln!(out, "  {name:<26} {desc}");
    }
    out.push_str("rates:\n  zero | inv_log | power:<p>\n");
    out.push_str("oracles:\n  translation | heat_spectral | heat_quadrature\n");
    out.push_str("experiments:\n  ");
    let kinds: Vec<&str> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
    out.push_str(&kinds.join(" | "));
    out.push('\n');
    out
}
