//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spherical-harmonic index (n={n}, j={j})")]
    InvalidIndex { n: usize, j: i64 },

    #[error("grid too coarse for band {band}: nlat={nlat}, nlon={nlon} (need nlat >= {need_nlat}, nlon >= {need_nlon})")]
    GridTooCoarse {
        band: usize,
        nlat: usize,
        nlon: usize,
        need_nlat: usize,
        need_nlon: usize,
    },

    #[error("band mismatch: {what} requires kernel/grid band >= {need}, have {have}")]
    BandMismatch {
        what: &'static str,
        need: usize,
        have: usize,
    },

    #[error("radius mismatch: {a} vs {b}")]
    RadiusMismatch { a: f64, b: f64 },

    #[error("grid mismatch: fields live on different grids")]
    GridMismatch,

    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),

    #[error("non-finite kernel sample at t={t}")]
    NonFiniteKernel { t: f64 },

    #[error("tensor family ({i},{k}) is not defined at degree n={n}")]
    InvalidFamily { i: usize, k: usize, n: usize },

    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: String, found: String },

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },

    #[error("dimension inconsistency: {0}")]
    DimensionMismatch(String),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
