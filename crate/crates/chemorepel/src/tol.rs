//! Shared tolerance constants.
//!
//! Verification-grade tolerances back the equilibrium and periodic-orbit
//! checks, where the answer feeds an assertion; sweep-grade tolerances back
//! bulk parameter scans, where speed matters and the downstream comparison
//! has slack of its own.

/// Relative tolerance for verification-grade time integration.
pub const ODE_REL_VERIFY: f64 = 1e-9;
/// Absolute tolerance for verification-grade time integration.
pub const ODE_ABS_VERIFY: f64 = 1e-12;
/// Relative tolerance for sweep-grade time integration.
pub const ODE_REL_SWEEP: f64 = 1e-6;
/// Absolute tolerance for sweep-grade time integration.
pub const ODE_ABS_SWEEP: f64 = 1e-9;
/// Absolute tolerance handed to the adaptive quadrature of source integrals.
pub const QUAD_ABS: f64 = 1e-12;
/// Relative residual at which the conjugate-gradient solve is converged.
pub const CG_REL: f64 = 1e-12;
/// Slack below zero tolerated before a nominally nonnegative quantity is
/// treated as a positivity violation.
pub const NONNEG_SLACK: f64 = 1e-12;
