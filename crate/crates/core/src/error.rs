use thiserror::Error;

/// Errors raised by the spectral laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("sample count mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("symbol is not finite at populated mode {mode:?}")]
    NonFiniteSymbol { mode: Vec<i64> },

    #[error("populated mode {mode:?} lies beyond the dealiasing cutoff {cutoff:?}")]
    BeyondCutoff { mode: Vec<i64>, cutoff: Vec<usize> },

    #[error("invalid Lebesgue exponent {0}: must be >= 1")]
    InvalidExponent(f64),

    #[error("field is not flagged real-valued")]
    NotReal,

    #[error("dyadic level {level} outside resolvable range [{min}, {max}]")]
    LevelOutOfRange { level: i32, min: i32, max: i32 },

    #[error("homogeneous norm undefined for nonzero mean (mean coefficient {0:e})")]
    NonzeroMean(f64),

    #[error("transition profile rejected: {0}")]
    InvalidProfile(String),

    #[error("resolution guard violated: r_outer * L = {product} < 4; minimal admissible L is {min_scale}")]
    Resolution { product: f64, min_scale: u32 },

    #[error("carrier 17*2^N/12 is off the lattice for N = {level}, L = {scale}: 17*2^N*L/12 is not an integer")]
    CarrierOffLattice { level: u32, scale: u32 },

    #[error("annulus containment violated: sqrt(d)*r_outer = {lhs} > 2^N/12 = {rhs}")]
    Containment { lhs: f64, rhs: f64 },

    #[error("negative time {0} (backward flows are not supported)")]
    NegativeTime(f64),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("time grid is not uniform: {0}")]
    NonUniformGrid(String),

    #[error("frequency overflow at order {order}: alias-free products need {required:?} modes per axis, grid has {cutoff:?}")]
    FrequencyOverflow {
        order: usize,
        required: Vec<usize>,
        cutoff: Vec<usize>,
    },

    #[error("spectrum reached the dealiasing cutoff at step {step}: edge content {fraction:e} of the peak")]
    Unresolved { step: usize, fraction: f64 },

    #[error("vacuum breach at step {step}: min(1 + rho) = {min_density}")]
    Vacuum { step: usize, min_density: f64 },

    #[error("time {0} is not a node of the series time grid")]
    OffGrid(f64),

    #[error("config: {0}")]
    Config(String),

    #[error("container format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
