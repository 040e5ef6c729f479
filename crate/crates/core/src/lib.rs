//! Spectral toolkit for bounded Jacobi operators and the kinetic operator of a
//! gauge-fixed matrix model on the Moyal plane.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod jacobi;
pub mod measure;
pub mod ncft;
pub mod orthopoly;
pub mod triple;
pub mod util;

pub use error::{Error, Result};
