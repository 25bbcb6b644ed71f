//! High-dimensional location tests built on weighted spatial signs.
//!
//! The crate computes the weighted sign statistic `W_n` for any radial weight
//! `K`, its ratio-consistent variance estimate, and the one-sided normal test
//! of `theta = 0`. Three weights are named:
//!
//! * [`WeightFunction::Os`] (`K(r) = 1/r`), the weight with the largest
//!   asymptotic power over all elliptical laws,
//! * [`WeightFunction::Ss`] (`K(r) = 1`), the plain spatial sign test,
//! * [`WeightFunction::Cq`] (`K(r) = r`), the sum of pairwise inner products.
//!
//! Alongside the tests live a scale-invariant variant ([`scaleinv`]), seeded
//! samplers for elliptical and independent-component models
//! ([`distributions`]), asymptotic power and efficiency formulas ([`power`]),
//! and a Monte Carlo size/power engine ([`simulation`]).
//!
//! ```
//! use hdsign::{run_test, SampleMatrix, WeightFunction};
//!
//! let x = SampleMatrix::from_rows(&[
//!     [0.8, 1.1, 0.3],
//!     [1.2, 0.4, 0.9],
//!     [0.5, 0.7, 1.4],
//!     [1.0, 1.3, 0.2],
//! ])?;
//! let out = run_test(&x, &WeightFunction::Os, 0.05)?;
//! assert!(out.z > 0.0);
//! # Ok::<(), hdsign::HdSignError>(())
//! ```

// `!(x > 0.0)` is used on purpose so NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distributions;
pub mod error;
pub mod normal;
pub mod power;
mod sample;
pub mod scaleinv;
pub mod signcore;
pub mod simulation;
pub mod weight;

pub use error::{HdSignError, Result};
pub use sample::SampleMatrix;
pub use signcore::{run_test, run_tests, spatial_sign, variance_estimator, weighted_sign_statistic, TestOutcome};
pub use weight::WeightFunction;
