//! Error type shared by every module of the core crate.

use alloc::boxed::Box;
use core::fmt;

/// Errors produced by the model, samplers, steppers, and study drivers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the documented domain of an operation.
    Domain(&'static str),
    /// A phase-space point that must be strictly positive and finite is not.
    InvalidState { x: f64, y: f64 },
    /// The implicit stage iteration failed to contract to tolerance within
    /// the iteration budget; `residual` is the last sup-norm update. This
    /// usually signals a step size too large for the fixed point to contract.
    FixedPointDiverged { residual: f64, iters: u32 },
    /// Structures with incompatible shapes or grids were combined.
    Mismatch(&'static str),
    /// A failure that occurred while advancing step `step` of a trajectory.
    AtStep { step: usize, cause: Box<Error> },
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    /// Annotates an error with the trajectory step index it occurred at.
    pub(crate) fn at_step(self, step: usize) -> Self {
        Error::AtStep {
            step,
            cause: Box::new(self),
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(what) => write!(f, "domain error: {what}"),
            Error::InvalidState { x, y } => {
                write!(f, "state ({x}, {y}) is not strictly positive and finite")
            }
            Error::FixedPointDiverged { residual, iters } => write!(
                f,
                "stage fixed-point iteration did not reach tolerance after {iters} \
                 iterations (last residual {residual:e}); the step size is likely too large"
            ),
            Error::Mismatch(what) => write!(f, "shape mismatch: {what}"),
            Error::AtStep { step, cause } => write!(f, "step {step}: {cause}"),
        }
    }
}

impl core::error::Error for Error {}
