use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point ({0}, {1}) lies outside the unit square")]
    OutOfSquare(String, String),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("edge from ({0}) to ({1}) is neither vertical-down nor horizontal-right")]
    NotAxisAligned(String, String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("grid step must be 1/k for a positive integer k, got {0}")]
    BadGridStep(String),
    #[error("tile ({0}, {1}) already holds an augmentation point")]
    TileOccupied(usize, usize),
    #[error("{got} augmentation points exceed the cap of {cap}")]
    TooManyPoints { got: usize, cap: usize },
    #[error("support of {got} atoms exceeds the enumeration cap of {cap}")]
    SupportTooLarge { got: usize, cap: usize },
    #[error("grid 1/{got} is finer than the enumeration cap 1/{cap}")]
    GridTooFine { got: usize, cap: usize },
    #[error("environment has no bounded density")]
    NotSmooth,
    #[error("separation violated: max b over R-rounds {max_b} >= min a over L-rounds {min_a}")]
    SeparationViolated { max_b: String, min_a: String },
    #[error("boundary crosses tile ({0}, {1}) in an unsupported way")]
    UnsupportedCrossing(usize, usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
