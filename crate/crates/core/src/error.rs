//! Error type shared across the solver stack.

use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

/// Vectors with norm at or below this threshold count as degenerate; density
/// derivatives are undefined there and the theory requires `|x_rho| >= c0 > 0`
/// anyway, so hitting it signals solver failure rather than a valid state.
pub const DEGENERACY_THRESHOLD: f64 = 1e-14;

#[derive(Debug)]
pub enum Error {
    /// A direction vector fell below [`DEGENERACY_THRESHOLD`].
    DegenerateVector,
    /// Mismatched ambient dimensions.
    DimensionMismatch { expected: usize, got: usize },
    /// The small-matrix eigenvalue iteration did not converge.
    EigenFailure,
    /// A linear system was singular to working precision.
    SingularSystem,
    /// Newton iteration hit its iteration cap or its residual kept growing.
    NewtonDiverged { iters: usize, residual: f64 },
    /// Invalid argument; the message names the offending quantity.
    InvalidInput(String),
    /// Exact solutions of self-similar presets exist only for `t < 1/2`.
    InvalidTime { t: f64 },
    /// A time step failed; `step` is the 1-based index of the failing step.
    StepFailed { step: usize, source: Box<Error> },
    /// A frame sink asked the time loop to stop.
    Aborted { step: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DegenerateVector => write!(f, "degenerate direction vector (|p| <= {DEGENERACY_THRESHOLD:e})"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::EigenFailure => write!(f, "eigenvalue iteration failed to converge"),
            Error::SingularSystem => write!(f, "linear system is singular to working precision"),
            Error::NewtonDiverged { iters, residual } => {
                write!(f, "Newton iteration diverged after {iters} iterations (residual {residual:e})")
            }
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::InvalidTime { t } => write!(f, "invalid time t = {t} (self-similar solution requires t < 1/2)"),
            Error::StepFailed { step, source } => write!(f, "time step {step} failed: {source}"),
            Error::Aborted { step } => write!(f, "run aborted by frame sink at step {step}"),
        }
    }
}

impl core::error::Error for Error {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            Error::StepFailed { source, .. } => Some(source.as_ref()),
            _ => None,
        }
    }
}
