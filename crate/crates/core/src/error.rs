use thiserror::Error;

/// Errors raised by the numerical laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point is not on the manifold: {0}")]
    OffManifold(String),
    #[error("eigenfunction sum has no terms")]
    EmptySum,
    #[error("manifold mismatch: {0}")]
    ManifoldMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("lowest eigenvalue must be positive to extend, got {0}")]
    NonPositiveEigenvalue(f64),
    #[error("grid resolution {given} too coarse, need at least {minimum}")]
    ResolutionRefused { given: usize, minimum: usize },
    #[error("zero set is empty: no zeros in window")]
    NoZeros,
    #[error("weight normalization {0} is not positive: alpha too small for the operator")]
    NonPositiveNormalization(f64),
    #[error("no sign change in bracket [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("vanishing mass: denominator {denominator} against scale {scale}")]
    VanishingMass { denominator: f64, scale: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("operator is not elliptic: symbol minimum {min} below {required}")]
    NotElliptic { min: f64, required: f64 },
    #[error("linear program solver failure: {0}")]
    SolverFailure(String),
    #[error("calibration constants: {0}")]
    Constants(String),
    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
