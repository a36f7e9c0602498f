//! Numerical laboratory for power-law remainder terms in Ikehara-type
//! Tauberian theorems.
//!
//! The crate builds staircase functions `f` that are non-decreasing and equal
//! to `A·x` away from a sequence of short intervals centred at `x_i = b^i`,
//! evaluates the transform `G(s) = ∫ (f(x) - A·x) x^{-s-1} dx` interval by
//! interval, continues `G` meromorphically past its abscissa of convergence,
//! and measures abscissas, pole locations and remainder exponents.
//!
//! Module map:
//!
//! * [`model`]: the staircase families and their exact pointwise evaluation.
//! * [`quadrature`]: adaptive Gauss–Kronrod oracle and the dyadic-block
//!   convergence classifier for generic integrands.
//! * [`transform`]: per-interval closed forms, partial sums, swings and the
//!   empirical abscissa of conditional convergence.
//! * [`continuation`]: the `j`-series continuation of `G`, the pole lattice
//!   and contour-moment pole fitting.
//! * [`diagnostics`]: exponent and coefficient estimators, the divergence
//!   witness and the holomorphy-vs-exponent scan.
//! * [`report`]: versioned CSV / JSON tables shared with the CLI.
//!
//! Grid-shaped work is dispatched through [`exec`], which uses rayon when the
//! `parallel` feature is enabled and a plain iterator otherwise.

// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod continuation;
pub mod diagnostics;
pub mod exec;
pub mod model;
pub mod quadrature;
pub mod report;
pub mod sum;
pub mod transform;

mod error;

pub use error::Error;
pub use model::{IntervalGeometry, StaircaseFamily, Variant};
pub use num_complex::Complex64;
