//! Convex-analysis toolkit and operator-splitting laboratory for the complex
//! Ginzburg-Landau equation on Dirichlet boxes in one and two dimensions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod convex;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod lawcheck;
pub mod stepper;

pub use error::{Error, Result};
