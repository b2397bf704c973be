//! Future drawdown and drawup functionals of Lévy processes: Laplace
//! exponents, scale functions, exact laws at exponential and fixed horizons,
//! Cramér, Höglund and convolution-equivalent tail asymptotics, and Monte
//! Carlo path simulation with reproducible per-path streams.

// `!(x > 0.0)` style guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bss;
pub mod cramer;
pub mod error;
pub mod exact;
pub mod heavy;
pub mod marginal;
pub mod model;
pub mod numeric;
pub mod scale;
pub mod sim;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
