// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod cost_models;
pub mod economy;
pub mod error;
pub mod pathway_solver;
pub mod quadrature;
pub mod scenario;
pub mod verify;

pub use error::{Error, Result};
