// Reference constants keep every printed digit; domain guards are written
// `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod caputo;
pub mod cli;
pub mod error;
pub mod relaxation;
pub mod schemes;
pub mod specfun;
pub mod sum;

pub use error::{Error, Result};
