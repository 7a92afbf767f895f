//! Differentially private estimation of bandable covariance matrices under
//! zero-concentrated differential privacy.
//!
//! The crate is organized bottom-up:
//!
//! * [`matrix`] and [`geometry`]: dense containers, norms, the Jacobi
//!   eigensolver, and the block/band index sets.
//! * [`privacy`]: zCDP ledger, Gaussian-mechanism calibration and noise.
//! * [`estimators`]: the private block primitive, the blockwise tridiagonal
//!   and adaptive estimators, and the precision estimator.
//! * [`datagen`]: bandable covariance families and a Gaussian sampler.
//! * [`theory`]: rate formulas, the blocking bound, Fisher information.
//! * [`harness`]: config-driven simulation runner behind the CLI.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod datagen;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod harness;
pub mod matrix;
pub mod privacy;
pub mod rng;
pub mod theory;

pub use error::{Error, Result};
pub use rng::RandomStream;
