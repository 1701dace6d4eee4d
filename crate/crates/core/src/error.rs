//! Error type shared across the solver crate.

use thiserror::Error;

/// Errors produced by grid construction, propagation and studies.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),

    #[error("invalid noise basis: {0}")]
    InvalidBasis(String),

    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("negative step size {0}")]
    NegativeStep(f64),

    #[error("window [{t0}, {t1}] is not aligned to the increment lattice (step {delta_ref})")]
    UnalignedWindow { t0: f64, t1: f64, delta_ref: f64 },

    #[error("step ratio is not an exact dyadic count: {0}")]
    NonDyadicRatio(String),

    #[error("oversampling factor exceeds the stored path resolution: {0}")]
    PathResolution(String),

    #[error("interval index {n} outside 1..={n_max}")]
    IntervalOutOfRange { n: u64, n_max: u64 },

    #[error("propagator failed on interval {interval}: {source}")]
    Propagation {
        interval: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid study specification: {0}")]
    InvalidStudy(String),

    #[error("mismatched run configurations: {0}")]
    MismatchedRuns(String),

    #[error("degenerate least-squares fit: {0}")]
    DegenerateFit(String),

    #[error("invalid cost-model parameters: {0}")]
    InvalidCostModel(String),
}

pub type Result<T> = std::result::Result<T, Error>;
