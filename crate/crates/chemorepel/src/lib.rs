// `!(x > y)` comparisons at validation sites are deliberate: they fail
// closed when a NaN arrives, which the refactored `x <= y` would accept.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod diagnostics;
pub mod error;
pub mod initial;
pub mod model;
pub mod ode;
pub mod pde;
pub mod quad;
pub mod scenario;
pub mod tol;

pub use error::{Error, Result};
