//! Weyl-structure calculus and ALF mass integrals on circle-fibered model spaces.

// NaN must fail validation, so `!(a < b)` is deliberate; index loops mirror the tensor formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod chart;
pub mod cli;
pub mod config;
pub mod error;
pub mod identities;
pub mod jet;
pub mod mass;
pub mod quadrature;
pub mod tensor;
pub mod util;
pub mod weyl;

pub use error::{Error, Result};
