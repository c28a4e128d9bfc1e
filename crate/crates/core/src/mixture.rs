//! Finitely supported shift mixtures.
//!
//! A [`ShiftMixture`] is the operator `f ↦ Σᵢ wᵢ f(· + sᵢ)`. Every Chernoff
//! function handled by this crate has that form, and so do all of its
//! powers: composition of two mixtures is the convolution of their atom
//! lists (offsets add, weights multiply). Powers are therefore exact up to
//! floating-point arithmetic, with no spatial discretisation involved.

use std::cmp::Ordering;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::testfns::TestFunction;

/// Relative tolerance under which two offsets are treated as the same atom:
/// `|s − s′| ≤ MERGE_RTOL · max(1, |s|, |s′|)`.
pub const MERGE_RTOL: f64 = 1e-12;

/// Default upper bound on the atom count of any mixture produced by
/// [`ShiftMixture::convolve`] or [`ShiftMixture::power`].
pub const DEFAULT_ATOM_CAP: usize = 2_000_001;

/// Atoms whose merged weight falls below this magnitude are dropped.
pub const PRUNE_BELOW: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub offset: f64,
    pub weight: f64,
}

impl Atom {
    pub fn new(offset: f64, weight: f64) -> Self {
        Self { offset, weight }
    }
}

/// Returns true when two offsets fall within the merge tolerance.
pub fn offsets_coincide(a: f64, b: f64) -> bool {
    (a - b).abs() <= MERGE_RTOL * 1f64.max(a.abs()).max(b.abs())
}

/// A finite weighted set of translation offsets, sorted by offset with no
/// two offsets inside the merge tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftMixture {
    atoms: Vec<Atom>,
}

impl ShiftMixture {
    /// Builds a mixture from `(offset, weight)` pairs, sorting by offset and
    /// merging coincident offsets.
    pub fn new<I>(atoms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut raw: Vec<Atom> = atoms
            .into_iter()
            .map(|(offset, weight)| Atom::new(offset, weight))
            .collect();
        if raw.is_empty() {
            return Err(Error::Construction(
                "mixture needs at least one atom".into(),
            ));
        }
        if let Some(bad) = raw
            .iter()
            .find(|a| !a.offset.is_finite() || !a.weight.is_finite())
        {
            return Err(Error::Construction(format!(
                "non-finite atom (offset {}, weight {})",
                bad.offset, bad.weight
            )));
        }
        raw.sort_by(|a, b| a.offset.total_cmp(&b.offset));
        let mut merged = Vec::with_capacity(raw.len());
        for atom in raw {
            push_merged(&mut merged, atom);
        }
        Ok(Self {
            atoms: prune(merged),
        })
    }

    /// The identity operator `{(0, 1)}`.
    pub fn identity() -> Self {
        Self::dirac(0.0)
    }

    /// A pure shift by `offset` with unit weight.
    pub fn dirac(offset: f64) -> Self {
        Self {
            atoms: vec![Atom::new(offset, 1.0)],
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn offsets(&self) -> impl Iterator<Item = f64> + '_ {
        self.atoms.iter().map(|a| a.offset)
    }

    /// `Σᵢ wᵢ f(x + sᵢ)` for an arbitrary closure, summed in ascending
    /// offset order.
    pub fn apply_fn<F: Fn(f64) -> f64>(&self, f: F, x: f64) -> f64 {
        self.atoms
            .iter()
            .fold(0.0, |acc, a| acc + a.weight * f(x + a.offset))
    }

    /// Applies the mixture to a test function at `x`.
    pub fn apply(&self, f: &TestFunction, x: f64) -> Result<f64> {
        let value = self.apply_fn(|y| f.eval(y), x);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::Evaluation(format!(
                "mixture applied to {} at x={x} gave {value}",
                f.name()
            )))
        }
    }

    /// Composition of the two operators, with the default atom cap.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.convolve_capped(other, DEFAULT_ATOM_CAP)
    }

    pub fn convolve_capped(&self, other: &Self, cap: usize) -> Result<Self> {
        let atoms = convolve_rows(&self.atoms, &other.atoms, cap)?;
        Ok(Self {
            atoms: prune(atoms),
        })
    }

    /// n-fold composition by binary exponentiation, with the default cap.
    pub fn power(&self, n: u64) -> Result<Self> {
        self.power_capped(n, DEFAULT_ATOM_CAP)
    }

    pub fn power_capped(&self, n: u64, cap: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("mixture power needs n >= 1".into()));
        }
        let tag = |e: Error| match e {
            Error::Resource { needed, cap, .. } => Error::Resource {
                what: format!("power with n={n}"),
                needed,
                cap,
            },
            other => other,
        };
        let mut result: Option<Self> = None;
        let mut base = self.clone();
        let mut k = n;
        loop {
            if k & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => r.convolve_capped(&base, cap).map_err(tag)?,
                });
            }
            k >>= 1;
            if k == 0 {
                break;
            }
            base = base.convolve_capped(&base, cap).map_err(tag)?;
        }
        Ok(result.expect("n >= 1 sets at least one bit"))
    }

    /// Operator norm on bounded functions with the sup norm: `Σ|wᵢ|`.
    pub fn operator_norm(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight.abs()).sum()
    }

    /// `Σᵢ wᵢ sᵢᵏ`.
    pub fn moment(&self, k: u32) -> f64 {
        let k = k as i32;
        self.atoms.iter().map(|a| a.weight * a.offset.powi(k)).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.moment(0)
    }

    pub fn mean(&self) -> f64 {
        self.moment(1) / self.moment(0)
    }

    /// Central second moment, normalised by total weight.
    pub fn variance(&self) -> f64 {
        let mass = self.moment(0);
        let mean = self.moment(1) / mass;
        self.atoms
            .iter()
            .map(|a| a.weight * (a.offset - mean).powi(2))
            .sum::<f64>()
            / mass
    }

    /// `Σⱼ wⱼ exp(i k sⱼ)`: the multiplier by which the mixture acts on
    /// `exp(i k x)`.
    pub fn charfn(&self, k: f64) -> Complex64 {
        self.atoms.iter().fold(Complex64::new(0.0, 0.0), |acc, a| {
            let (s, c) = (k * a.offset).sin_cos();
            acc + Complex64::new(a.weight * c, a.weight * s)
        })
    }

    /// True when all weights are non-negative and sum to one within `tol`.
    pub fn is_probability(&self, tol: f64) -> bool {
        self.atoms.iter().all(|a| a.weight >= 0.0) && (self.total_weight() - 1.0).abs() <= tol
    }

    /// Atom-wise comparison: equal atom counts, offsets within the merge
    /// tolerance and weights within relative `weight_rtol`.
    pub fn approx_eq(&self, other: &Self, weight_rtol: f64) -> bool {
        self.atoms.len() == other.atoms.len()
            && self.atoms.iter().zip(&other.atoms).all(|(a, b)| {
                offsets_coincide(a.offset, b.offset)
                    && (a.weight - b.weight).abs()
                        <= weight_rtol * a.weight.abs().max(b.weight.abs())
            })
    }
}

fn push_merged(out: &mut Vec<Atom>, atom: Atom) {
    match out.last_mut() {
        Some(last) if offsets_coincide(last.offset, atom.offset) => last.weight += atom.weight,
        _ => out.push(atom),
    }
}

fn prune(atoms: Vec<Atom>) -> Vec<Atom> {
    if atoms.iter().all(|a| a.weight.abs() < PRUNE_BELOW) {
        // keep the heaviest atom so the mixture stays non-empty
        let keep = atoms
            .iter()
            .copied()
            .max_by(|a, b| {
                a.weight
                    .abs()
                    .partial_cmp(&b.weight.abs())
                    .unwrap_or(Ordering::Equal)
            })
            .into_iter()
            .collect();
        return keep;
    }
    atoms
        .into_iter()
        .filter(|a| a.weight.abs() >= PRUNE_BELOW)
        .collect()
}

/// Merges two offset-sorted atom lists, combining coincident offsets.
fn merge_sorted(left: Vec<Atom>, right: Vec<Atom>) -> Vec<Atom> {
    let mut out = Vec::with_capacity(left.len() + right.len());
    let (mut i, mut j) = (0, 0);
    while i < left.len() && j < right.len() {
        if left[i].offset <= right[j].offset {
            push_merged(&mut out, left[i]);
            i += 1;
        } else {
            push_merged(&mut out, right[j]);
            j += 1;
        }
    }
    for &a in &left[i..] {
        push_merged(&mut out, a);
    }
    for &a in &right[j..] {
        push_merged(&mut out, a);
    }
    out
}

/// Convolution as a balanced merge tree over the rows `{(sᵢ + rⱼ, wᵢvⱼ)}ⱼ`.
///
/// Each row is sorted because `other` is. For lattice mixtures the merged
/// lists stay short, so the total work is O(|lhs|·|rhs|) without a global
/// sort of all products.
fn convolve_rows(lhs: &[Atom], rhs: &[Atom], cap: usize) -> Result<Vec<Atom>> {
    match lhs.len() {
        0 => Ok(Vec::new()),
        1 => {
            let a = lhs[0];
            let mut row = Vec::with_capacity(rhs.len());
            for b in rhs {
                push_merged(
                    &mut row,
                    Atom::new(a.offset + b.offset, a.weight * b.weight),
                );
            }
            check_cap(row.len(), cap)?;
            Ok(row)
        }
        len => {
            let (left, right) = lhs.split_at(len / 2);
            let merged = merge_sorted(
                convolve_rows(left, rhs, cap)?,
                convolve_rows(right, rhs, cap)?,
            );
            check_cap(merged.len(), cap)?;
            Ok(merged)
        }
    }
}

fn check_cap(len: usize, cap: usize) -> Result<()> {
    if len > cap {
        Err(Error::Resource {
            what: "convolution".into(),
            needed: len,
            cap,
        })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn heat_g(a: f64, t: f64) -> ShiftMixture {
        let h = 2.0 * a * t.sqrt();
        ShiftMixture::new([(h, 0.25), (-h, 0.25), (0.0, 0.5)]).unwrap()
    }

    #[test]
    fn make_sorts_and_merges() {
        let m = heat_g(1.0, 1.0);
        let offs: Vec<f64> = m.offsets().collect();
        assert_eq!(offs, vec![-2.0, 0.0, 2.0]);

        let merged = ShiftMixture::new([(0.0, 0.5), (1e-18, 0.5)]).unwrap();
        assert_eq!(merged.len(), 1);
        assert_eq!(merged.atoms()[0].weight, 1.0);
        assert!(merged.atoms()[0].offset.abs() < 1e-17);
    }

    #[test]
    fn make_rejects_bad_input() {
        assert!(matches!(
            ShiftMixture::new(Vec::<(f64, f64)>::new()),
            Err(Error::Construction(_))
        ));
        assert!(ShiftMixture::new([(f64::NAN, 1.0)]).is_err());
        assert!(ShiftMixture::new([(0.0, f64::INFINITY)]).is_err());
    }

    #[test]
    fn zero_weights_kept_only_when_alone() {
        let m = ShiftMixture::new([(0.0, 0.0)]).unwrap();
        assert_eq!(m.len(), 1);
        let m = ShiftMixture::new([(0.0, 0.0), (1.0, 2.0)]).unwrap();
        assert_eq!(m.atoms(), &[Atom::new(1.0, 2.0)]);
        let cancelled = ShiftMixture::new([(1.0, 1.0), (1.0, -1.0), (2.0, 3.0)]).unwrap();
        assert_eq!(cancelled.len(), 1);
    }

    #[test]
    fn apply_identity_and_odd_symmetry() {
        let id = ShiftMixture::identity();
        assert_eq!(id.apply_fn(|x| x.exp(), 0.7), 0.7f64.exp());
        let m = heat_g(1.0, 1.0);
        assert!(m.apply_fn(f64::sin, 0.0).abs() < 1e-16);
    }

    #[test]
    fn binomial_square() {
        let h = 0.3;
        let m = ShiftMixture::new([(0.0, 0.5), (h, 0.5)]).unwrap();
        let sq = m.convolve(&m).unwrap();
        let expect = ShiftMixture::new([(0.0, 0.25), (h, 0.5), (2.0 * h, 0.25)]).unwrap();
        assert!(sq.approx_eq(&expect, 1e-15));
        assert!(ShiftMixture::identity()
            .convolve(&m)
            .unwrap()
            .approx_eq(&m, 0.0));
    }

    #[test]
    fn heat_g_square_matches_polynomial_product() {
        // coefficients of (¼x⁻¹ + ½ + ¼x)² by plain polynomial multiplication
        let p = [0.25, 0.5, 0.25];
        let mut q = [0.0; 5];
        for (i, a) in p.iter().enumerate() {
            for (j, b) in p.iter().enumerate() {
                q[i + j] += a * b;
            }
        }
        assert_eq!(q, [1.0 / 16.0, 0.25, 0.375, 0.25, 1.0 / 16.0]);

        let (a, t) = (1.3, 0.4);
        let h = 2.0 * a * f64::sqrt(t);
        let sq = heat_g(a, t).convolve(&heat_g(a, t)).unwrap();
        assert_eq!(sq.len(), 5);
        for (k, atom) in sq.atoms().iter().enumerate() {
            assert_relative_eq!(atom.offset, (k as f64 - 2.0) * h, max_relative = 1e-14);
            assert_relative_eq!(atom.weight, q[k], max_relative = 1e-15);
        }
    }

    #[test]
    fn pure_shift_power() {
        let c = 0.1 + 0.1 * 0.25;
        let p = ShiftMixture::dirac(c).power(37).unwrap();
        assert_eq!(p.len(), 1);
        assert_relative_eq!(p.atoms()[0].offset, 37.0 * c, max_relative = 1e-14);
        assert_eq!(p.atoms()[0].weight, 1.0);
    }

    #[test]
    fn power_one_and_zero() {
        let m = heat_g(1.0, 0.5);
        assert_eq!(m.power(1).unwrap(), m);
        assert!(matches!(m.power(0), Err(Error::Domain(_))));
    }

    #[test]
    fn lattice_power_stays_lattice() {
        let n = 200;
        let p = heat_g(1.0, 1.0 / n as f64).power(n).unwrap();
        assert_eq!(p.len(), 2 * n as usize + 1);
        assert_relative_eq!(p.total_weight(), 1.0, max_relative = 1e-13);
        assert_relative_eq!(p.variance(), 2.0, max_relative = 1e-10);

        // the outermost weights 4⁻ⁿ underflow and are pruned
        let n = 1000;
        let p = heat_g(1.0, 1.0 / n as f64).power(n).unwrap();
        assert!(p.len() < 2 * n as usize + 1);
        assert!(p.atoms().iter().all(|a| a.weight >= PRUNE_BELOW));
        assert_relative_eq!(p.total_weight(), 1.0, max_relative = 1e-13);
        assert_relative_eq!(p.variance(), 2.0, max_relative = 1e-10);
    }

    #[test]
    fn cap_is_reported() {
        let m = ShiftMixture::new([(0.0, 0.5), (1.0, 0.5)]).unwrap();
        match m.power_capped(10, 8) {
            Err(Error::Resource { what, cap, .. }) => {
                assert!(what.contains("n=10"));
                assert_eq!(cap, 8);
            }
            other => panic!("expected resource error, got {other:?}"),
        }
        // incommensurate offsets blow up combinatorially
        let m =
            ShiftMixture::new([(0.0, 0.5), (1.0, 0.25), (std::f64::consts::SQRT_2, 0.25)]).unwrap();
        assert!(m.convolve_capped(&m, 5).is_err());
        assert_eq!(m.convolve(&m).unwrap().len(), 6);
    }

    #[test]
    fn norm_and_moments() {
        assert_eq!(heat_g(2.0, 3.0).operator_norm(), 1.0);
        let signed = ShiftMixture::new([(0.0, -1.0), (1.0, 2.0)]).unwrap();
        assert_eq!(signed.operator_norm(), 3.0);
        assert!(signed.operator_norm() >= signed.total_weight().abs());

        let (a, t) = (1.5, 0.7);
        let m = heat_g(a, t);
        assert_relative_eq!(m.moment(2), 2.0 * a * a * t, max_relative = 1e-14);
        assert_eq!(m.moment(1), 0.0);
        assert_eq!(m.moment(3), 0.0);
    }

    #[test]
    fn charfn_closed_forms() {
        assert_eq!(
            ShiftMixture::identity().charfn(3.3),
            Complex64::new(1.0, 0.0)
        );
        let (a, t, k) = (1.0, 0.8, 2.5);
        let c = heat_g(a, t).charfn(k);
        let expect = 0.5 + 0.5 * (2.0 * a * t.sqrt() * k).cos();
        assert_relative_eq!(c.re, expect, max_relative = 1e-14);
        assert!(c.im.abs() < 1e-16);
    }
}
