//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by the design, simulation, and analysis modules.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A configuration value violates an invariant.
    #[error("invalid {parameter}: {value} ({constraint})")]
    InvalidValue {
        parameter: &'static str,
        value: String,
        constraint: &'static str,
    },

    /// Volume-conserving rescale produced a non-positive dimension.
    #[error("volume constraint infeasible for {parameter}: solved end value {value} mm is not positive")]
    ConstraintInfeasible { parameter: &'static str, value: f64 },

    /// A quantity left the domain of a material law.
    #[error("domain error: {0}")]
    Domain(String),

    /// Segment equilibrium has no solution inside the bending bracket.
    #[error("segment saturated: no equilibrium below {limit_deg} deg at {pressure_kpa} kPa")]
    Saturation { pressure_kpa: f64, limit_deg: f64 },

    /// A parsed file row was malformed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Input data does not satisfy an operation's preconditions.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Interpolation target lies outside the stored span.
    #[error("{what} = {value} outside span [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
}

pub type Result<T> = std::result::Result<T, CoreError>;
