#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Chernoff approximations `G(t/n)ⁿ f` of operator semigroups on bounded
//! uniformly continuous functions of one real variable.
//!
//! Every Chernoff function in the catalog is a finite combination of
//! translations, so its powers are computed exactly as convolution powers
//! of a [`ShiftMixture`]. The approximations are compared with exact
//! semigroups (translation and the heat equation) to measure convergence
//! rates empirically.

pub mod chernoff;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod mixture;
pub mod quadrature;
pub mod semigroups;
pub mod testfns;

pub use chernoff::{ChernoffFamily, RateFunction};
pub use error::{Error, Result};
pub use experiments::{ErrorCurve, RateFit, SamplingDomain};
pub use mixture::{Atom, ShiftMixture};
pub use semigroups::{Generator, OracleKind, SemigroupOracle};
pub use testfns::TestFunction;
