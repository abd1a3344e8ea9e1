use thiserror::Error;

use crate::grid::Space;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value at sample {index}")]
    NonFinite { index: usize },

    #[error("wave function has zero norm")]
    ZeroNorm,

    #[error("expected a {expected:?}-space wave function, got {found:?}")]
    WrongSpace { expected: Space, found: Space },

    #[error("input is not normalized (norm^2 = {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("density is negative at sample {index} ({value})")]
    NegativeDensity { index: usize, value: f64 },

    #[error("sequence length {found} does not match grid size {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("moment order {0} not supported (0..=4)")]
    InvalidOrder(u32),

    #[error("Hermite order {0} out of range (0..=64)")]
    OrderOutOfRange(usize),

    #[error("width parameter must be positive and finite, got {0}")]
    InvalidDelta(f64),

    #[error("invalid time value {0}")]
    InvalidTime(f64),

    #[error("grid too small: boundary mass {boundary_mass:e} exceeds {tolerance:e}")]
    GridTooSmall { boundary_mass: f64, tolerance: f64 },

    #[error("required grid size {required} exceeds cap {max_n}")]
    ResourceLimit { required: usize, max_n: usize },

    #[error("grids are not commensurate: {0}")]
    GridMismatch(String),

    #[error("momentum Fisher information drifted by {rel_drift:e} across the series")]
    MomentumDrift { rel_drift: f64 },

    #[error("need at least {needed} samples in the fit window, found {found}")]
    InsufficientSamples { needed: usize, found: usize },

    #[error("non-positive product {value} at t = {t}")]
    NonPositiveProduct { t: f64, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
