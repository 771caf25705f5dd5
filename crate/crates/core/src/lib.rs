//! Deterministic ridge leverage score (DRLS) column sampling.
//!
//! The crate computes ridge leverage scores, selects columns by a
//! data-driven score threshold, runs ridge regression on the selected
//! columns, and numerically checks the approximation guarantees that the
//! selection is known to satisfy.

pub mod drls;
pub mod error;
pub mod guarantees;
pub mod io;
pub mod leverage;
pub mod matrix;
pub mod pipeline;
pub mod regression;
pub mod synth;

pub use error::{DrlsError, Result};
pub use matrix::DenseMatrix;
