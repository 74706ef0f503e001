//! Quaternionic pseudo-Hermitian quantum dynamics with a time-independent
//! positive metric, and the complex projection of those dynamics.
//!
//! The crate is organised bottom-up:
//!
//! - [`quatmat`]: quaternionic scalars and matrices in symplectic form.
//! - [`metric`]: the metric operator `η`, its roots and `η`-relative notions.
//! - [`dynamics`]: generators, fixed-step propagation and trajectories.
//! - [`projection`]: the complex-projected maps and their validators.
//! - [`scenarios`]: the closed-form two-level family used as ground truth.

pub mod dynamics;
pub mod error;
pub mod metric;
pub mod projection;
pub mod sampling;
pub mod scenarios;
pub mod tol;
pub mod quatmat;

pub use error::{Error, Result};
pub use metric::{GeneralizedDensity, Metric, ResidualCheck, RootSource};
pub use quatmat::{CMatrix, Positivity, QMatrix, Quaternion, C64};

/// Crate version, recorded in run reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
