use thiserror::Error;

/// Every fallible operation in the crate reports one of these.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    InvalidDims(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian (max |M - M†| = {0:e})")]
    NotHermitian(f64),
    #[error("trace is {0}, expected 1")]
    NotUnitTrace(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("operator is not unitary (max |U†U - 1| = {0:e})")]
    NotUnitary(f64),
    #[error("operator is not a projector (max |P² - P| = {0:e})")]
    NotProjector(f64),
    #[error("trivial projector: {0}")]
    TrivialProjector(&'static str),
    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),
    #[error("impossible outcome: branch probability {0:e}")]
    ImpossibleOutcome(f64),
    #[error("invalid factor selection: {0}")]
    InvalidFactors(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("position {x} mm outside scan range [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },
    #[error("empty channel: {0}")]
    EmptyChannel(String),
    #[error("step map is not isometric: {0}")]
    NotIsometric(String),
    #[error("unsupported input: {0}")]
    UnsupportedInput(String),
    #[error("target unreachable: {0}")]
    TargetUnreachable(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
