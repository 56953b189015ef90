// `!(x > 0.0)` style guards reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod cli;
pub mod config;
pub mod constants;
pub mod error;
pub mod experiments;
pub mod fields;
pub mod format;
pub mod moser;
pub mod norms;
pub mod reduce;
pub mod solver;

pub use error::{Error, Result};
