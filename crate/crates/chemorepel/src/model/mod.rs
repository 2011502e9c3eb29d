//! Parameters, mesh, fields, and the supply-term evaluator shared by the
//! ODE and PDE sides of the laboratory.

pub mod field;
pub mod grid;
pub mod source;

pub use field::{grad_l2_sq, integral, l2_norm_sq, neumann_laplacian, neumann_laplacian_into, Field};
pub use grid::Grid;
pub use source::{DecaySignal, PeriodicSignal, SourceSpec};

use crate::error::{Error, Result};

/// The four coefficients of the reaction-diffusion system:
/// cell diffusivity D, chemotactic sensitivity chi (any sign), logistic
/// growth rate r, and chemical self-production rate a.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    d: f64,
    chi: f64,
    r: f64,
    a: f64,
}

impl ModelParams {
    pub fn new(d: f64, chi: f64, r: f64, a: f64) -> Result<ModelParams> {
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::validation(format!("D must be > 0, got {d}")));
        }
        if !chi.is_finite() {
            return Err(Error::validation("chi must be finite"));
        }
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::validation(format!("r must be > 0, got {r}")));
        }
        if !(a.is_finite() && a >= 0.0) {
            return Err(Error::validation(format!("a must be >= 0, got {a}")));
        }
        Ok(ModelParams { d, chi, r, a })
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn a(&self) -> f64 {
        self.a
    }
}
