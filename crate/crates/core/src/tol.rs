//! Numerical thresholds shared across the crate.

/// Relative Hermiticity tolerance used when validating a metric.
pub const HERMITICITY: f64 = 1e-12;

/// Largest accepted condition number of `χ(A)` before `A` counts as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Default positivity tolerance, scaled by the spectral radius.
pub const POSITIVITY: f64 = 1e-10;

/// Accuracy required of `T² = η` for a supplied or computed root.
pub const ROOT: f64 = 1e-10;

/// Relative tolerance for structural preconditions on computed inputs
/// (Hermiticity of an evolved state, anti-Hermiticity of a generator).
pub const PRECONDITION: f64 = 1e-9;

/// Anti-Hermiticity required of generator samples, relative to their size.
pub const GENERATOR: f64 = 1e-12;

/// Default fixed integrator step.
pub const INTEGRATOR_STEP: f64 = 1e-4;

/// Default central-difference step for time derivatives of the metric.
pub const DERIVATIVE_STEP: f64 = 1e-5;
