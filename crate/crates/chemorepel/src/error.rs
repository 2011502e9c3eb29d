use thiserror::Error;

/// Unified error type for the whole laboratory.
///
/// The CLI maps variants onto its exit-code contract: configuration and
/// usage problems exit 2, numerical failures (solver aborts, NaN, stiffness)
/// exit 3. Everything carries enough context to be printed as-is.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of an operation
    /// (negative time, a != 0 where a = 0 is required, and so on).
    #[error("{0}")]
    Domain(String),

    /// A field does not match the grid it is used with.
    #[error("{0}")]
    Shape(String),

    /// NaN/Inf appeared, positivity was lost, or an iteration diverged.
    #[error("{0}")]
    Numeric(String),

    /// Explicit integrator step size collapsed; the problem is too stiff.
    #[error("step size underflow at t = {t:.6e} (h = {h:.3e}): system too stiff for the explicit integrator")]
    Stiffness { t: f64, h: f64 },

    /// Advective CFL condition violated with adaptive stepping disabled.
    #[error("CFL violation at t = {t:.6e}: dt = {dt:.3e} exceeds the stable bound {max_dt:.3e}; reduce dt or enable adaptive stepping")]
    Cfl { t: f64, dt: f64, max_dt: f64 },

    /// Linear solver failed to reach its residual target.
    #[error("linear solver failed: {0}")]
    Solver(String),

    /// Not enough (or not clean enough) data to decide, e.g. non-monotone
    /// refinement errors in an order check.
    #[error("{0}")]
    Inconclusive(String),

    /// A parameter sits on the wrong side of a model threshold.
    #[error("{0}")]
    Threshold(String),

    /// Config text failed to parse; carries the offending line number.
    #[error("line {line}: {msg}")]
    Config { line: usize, msg: String },

    /// Config parsed but a value violates a documented constraint.
    #[error("{0}")]
    Validation(String),

    /// Run exceeded its wall-clock guard.
    #[error("wall-clock limit of {limit_secs} s exceeded at t = {t:.6e}")]
    Timeout { limit_secs: f64, t: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// True for failures of the numerics rather than of the user's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Numeric(_)
                | Error::Stiffness { .. }
                | Error::Cfl { .. }
                | Error::Solver(_)
                | Error::Inconclusive(_)
                | Error::Timeout { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
