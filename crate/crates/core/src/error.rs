// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by the numerical kernels, scenario drivers and the runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("unphysical state: {0}")]
    Unphysical(String),

    #[error("invalid mode index {index} for {boundary} boundary conditions")]
    InvalidMode { index: i64, boundary: &'static str },

    #[error("worldline: {0}")]
    Worldline(String),

    #[error("ambiguous common time: {0}")]
    AmbiguousTime(String),

    #[error("malformed coupling matrices: {0}")]
    MalformedCoupling(String),

    #[error("symplectic drift {drift:e} exceeds ceiling {ceiling:e} at tau = {tau}")]
    DriftExceeded { drift: f64, ceiling: f64, tau: f64 },

    #[error("step size underflow at tau = {tau} (h = {step:e})")]
    StepUnderflow { tau: f64, step: f64 },

    #[error("step budget of {0} exhausted")]
    StepBudget(usize),

    #[error("squeezing out of domain: {0}")]
    SqueezingDomain(String),

    #[error("consistency relation residual {residual:e} exceeds ceiling {ceiling:e}")]
    Consistency { residual: f64, ceiling: f64 },

    #[error("factorisation failed: {0}")]
    Factorisation(String),

    #[error("config: {0}")]
    Config(String),

    #[error("mode convergence not reached: {0}")]
    NonConvergence(String),

    #[error("thermality check failed: {0}")]
    Thermality(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the command-line runner.
    ///
    /// | code | category |
    /// |------|----------|
    /// | 1 | I/O and other runtime failures |
    /// | 2 | configuration or argument error |
    /// | 3 | symplectic drift ceiling exceeded |
    /// | 4 | mode convergence not reached |
    /// | 5 | thermality check failed |
    /// | 6 | integrator failure (step underflow / budget) |
    /// | 7 | unphysical state or factorisation failure |
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 1,
            Error::InvalidArgument(_)
            | Error::Config(_)
            | Error::InvalidMode { .. }
            | Error::Worldline(_)
            | Error::AmbiguousTime(_)
            | Error::DimensionMismatch { .. } => 2,
            Error::DriftExceeded { .. } => 3,
            Error::NonConvergence(_) => 4,
            Error::Thermality(_) => 5,
            Error::StepUnderflow { .. } | Error::StepBudget(_) => 6,
            Error::NotSymmetric(_)
            | Error::Unphysical(_)
            | Error::MalformedCoupling(_)
            | Error::SqueezingDomain(_)
            | Error::Consistency { .. }
            | Error::Factorisation(_) => 7,
        }
    }
}
