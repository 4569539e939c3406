//! Clocks of positive self-similar Markov processes.
//!
//! - [`numerics`]: special functions and scalar solvers.
//! - [`models`]: the Lévy families as Laplace exponents.
//! - [`rate`]: rate functions, Legendre duals, boundary classification.
//! - [`sim`]: Lamperti path simulation and clock estimators.
//! - [`moments`]: moments of exponential functionals.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod error;
pub mod exec;
pub mod models;
pub mod moments;
pub mod numerics;
pub mod rate;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
pub use models::{make_model, Family, FamilyKind, LevyModel, ModelDescriptor};
