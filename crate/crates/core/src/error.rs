use thiserror::Error;

/// Errors raised by the quaternionic algebra and the dynamics built on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("{op} requires a square matrix, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("matrix is singular (condition number {condition:.3e})")]
    Singular { condition: f64 },

    #[error("{what} is not Hermitian (residual {residual:.3e})")]
    NotHermitian { what: &'static str, residual: f64 },

    #[error("{what} is not anti-Hermitian at t = {t} (residual {residual:.3e})")]
    NotAntiHermitian {
        what: &'static str,
        t: f64,
        residual: f64,
    },

    #[error("{what} is not positive (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive {
        what: &'static str,
        min_eigenvalue: f64,
    },

    #[error("metric is not complex (quaternionic block norm {beta_norm:.3e})")]
    MetricNotComplex { beta_norm: f64 },

    #[error("supplied root is inconsistent with the metric: {reason}")]
    InconsistentRoot { reason: String },

    #[error("no root of the metric is available")]
    RootUnavailable,

    #[error("{what} is not pseudo-Hermitian (residual {residual:.3e})")]
    NotPseudoHermitian { what: &'static str, residual: f64 },

    #[error("cannot normalize: Re Tr = {re_trace:.3e}")]
    ZeroTrace { re_trace: f64 },

    #[error("degenerate metric: xy - |z|^2 = {det:.3e}")]
    DegenerateMetric { det: f64 },

    #[error("evaluation at breakpoint t = {t}")]
    Breakpoint { t: f64 },

    #[error("integration step [{from}, {to}] crosses the discontinuity at t = {at}")]
    CrossesDiscontinuity { from: f64, to: f64, at: f64 },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("time {t} lies outside the sampled range [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },

    #[error("inverse blocks are inconsistent with the operator (residual {residual:.3e})")]
    InconsistentInverse { residual: f64 },

    #[error("the two constructions of H disagree (residual {residual:.3e})")]
    FactorizationMismatch { residual: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
