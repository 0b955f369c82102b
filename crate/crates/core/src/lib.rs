//! Multi-objective Bayesian optimization with a learned Pareto set model.
//!
//! A campaign alternates between fitting Gaussian process surrogates to the
//! evaluated designs, training a preference-conditioned network that maps
//! trade-off weights to designs on the surrogate Pareto front, and picking a
//! batch of new designs by hypervolume improvement.

pub mod campaign;
pub mod error;
pub mod hv;
pub mod problems;
pub mod psmodel;
pub mod rng;
pub mod scalarize;
pub mod surrogate;

pub use error::{Error, Result};
