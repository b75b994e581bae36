//! Generalized convolution (low-pass filtering) of scalar, vector, and
//! rank-2 tensor fields on the 2-sphere, built on scalar/vector/tensor
//! spherical harmonics. The filters are diagonal in the canonical harmonic
//! bases and commute with the tangential differential operators; the test
//! suite certifies those properties numerically.

// index-based loops mirror the (n,j)/(i,k) math throughout
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod sht;
pub mod kernels;
pub mod vector;
pub mod diffops;
pub mod tensor;
pub mod helmholtz;
pub mod filter;
pub mod io;

pub use error::{Error, Result};
