//! Block encodings, amplitude amplification and quantum nonlinear solvers,
//! executed on a statevector simulator or on an algebraic shadow backend.

// `!(a > b)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod amplify;
pub mod circuit;
pub mod encoding;
pub mod error;
pub mod linalg;
pub mod linsolve;
pub mod polynomial;
pub mod problems;
pub mod run;
pub mod solvers;
pub mod verify;

pub use error::{Error, ErrorCategory, Result};
