use thiserror::Error;

/// Errors raised by the derivative machinery.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must have at least one row and one column (got {rows}x{cols})")]
    EmptyMatrix { rows: usize, cols: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular value decomposition did not converge")]
    SvdFailure,

    #[error("SVD invariant violated: {0}")]
    SvdInvariant(String),

    #[error("dense output of {requested} entries exceeds the cap of {cap}")]
    SizeOverflow { requested: u128, cap: u128 },

    #[error("singular value {k} is not simple: spectral gap {gap:e} <= tolerance {threshold:e}")]
    DegenerateSpectrum { k: usize, gap: f64, threshold: f64 },

    #[error(
        "singular value {k} is numerically zero (sigma_k = {sigma:e}, threshold {threshold:e})"
    )]
    ZeroSingularValue {
        k: usize,
        sigma: f64,
        threshold: f64,
    },

    #[error("order {n} exceeds the configured maximum {max}")]
    OrderTooLarge { n: usize, max: usize },

    #[error("branch {k} cannot be tracked at x = {x:e}: |x|*||dA||_2 = {excursion:e} >= gap/4 = {limit:e}")]
    BranchAmbiguity {
        k: usize,
        x: f64,
        excursion: f64,
        limit: f64,
    },

    #[error("polynomial fit is ill-conditioned (condition number {cond:e})")]
    IllConditionedFit { cond: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
