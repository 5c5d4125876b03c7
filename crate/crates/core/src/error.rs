//! Error type shared by every module.

use alloc::boxed::Box;
use alloc::string::String;

/// Failures reported by the numerical routines.
///
/// Every precondition violation maps to a variant here; nothing in the crate
/// panics on bad numeric input.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("matrix is not positive definite (pivot {pivot} = {value})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("{what} did not converge after {iterations} iterations (last estimate {estimate})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        estimate: f64,
    },
    #[error("parameter `{name}` = {value} is out of range: {expected}")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("root is not bracketed: f({lo}) = {f_lo}, f({hi}) = {f_hi}")]
    RootNotBracketed {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
    #[error("argument {value} outside the domain of {what}")]
    OutsideDomain { what: &'static str, value: f64 },
    #[error("{0}")]
    Unsupported(String),
    #[error("step size underflow in backtracking (step {step})")]
    StepUnderflow { step: f64 },
    #[error("step {step} exceeds the admissible bound {bound} for {what}")]
    StepBound {
        what: &'static str,
        step: f64,
        bound: f64,
    },
    #[error("Hessian is indefinite at iteration {iteration}")]
    IndefiniteHessian { iteration: usize },
    #[error("iteration diverged at step {iteration} (norm {norm})")]
    Diverged { iteration: usize, norm: f64 },
    #[error("majorization violated at iteration {iteration}: excess {excess}")]
    MajorizationViolation { iteration: usize, excess: f64 },
    #[error("problem is unbounded below: {0}")]
    Unbounded(&'static str),
    #[error("numeric overflow in {0}")]
    Overflow(&'static str),
    #[error("block {index}: {inner}")]
    Block { index: usize, inner: Box<Error> },
}

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange {
            name,
            value,
            expected: "finite and > 0",
        })
    }
}
