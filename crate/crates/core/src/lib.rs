// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod error;
pub mod fastsum;
pub mod graphop;
pub mod kernels;
pub mod learn;
pub mod nfft;
pub mod spectral;

pub use error::{FgsError, Result};
