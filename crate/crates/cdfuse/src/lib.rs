//! Fusing expert-opinion priors with two-arm binary trial data.
//!
//! Two routes are provided: full Bayes with four beta-family priors
//! ([`bayes`]) and confidence-distribution combination ([`cd`]).
//! [`diagnostics`] summarizes the resulting curves and flags posteriors whose
//! point estimate falls outside the prior/likelihood range.

pub mod bayes;
pub mod cd;
pub mod datasets;
pub mod diagnostics;
pub mod elicit;
pub mod error;
pub mod grid;
pub mod par;
pub mod quad;
pub mod roots;
pub mod sim;
pub mod specfun;
pub mod stats;

pub use error::{Error, Result};
pub use grid::GridDensity;
pub use par::ExecMode;
