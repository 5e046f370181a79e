use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("factor dimensions {dims:?} do not multiply to matrix size {rows}x{cols}")]
    FactorMismatch {
        dims: Vec<usize>,
        rows: usize,
        cols: usize,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("partial trace needs at least one kept factor; use the scalar trace instead")]
    EmptyKeepSet,
    #[error("factor index {index} out of range for {count} factors")]
    FactorIndex { index: usize, count: usize },
    #[error("not a density operator: {0}")]
    NotDensity(String),
    #[error("operator is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },
    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("Fock truncation n_max = {requested} too small, need at least {required}")]
    TruncationTooSmall { requested: usize, required: usize },
    #[error("coherent projectors ill-conditioned: overlap {epsilon:.4} exceeds 0.99")]
    IllConditioned { epsilon: f64 },
    #[error("channel violates {property}: {detail}")]
    NotCptp { property: &'static str, detail: String },
    #[error("backends disagree by {deviation:.3e} (limit {limit:.1e})")]
    BackendDisagreement { deviation: f64, limit: f64 },
    #[error("effective coupling undefined: radicand {radicand:.6} is negative")]
    Domain { radicand: f64 },
    #[error("quadrature did not converge (estimated error {error:.3e})")]
    Quadrature { error: f64 },
    #[error("{0}")]
    Unsupported(String),
    #[error("sweep point {params} failed: {source}")]
    SweepPoint {
        params: String,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
