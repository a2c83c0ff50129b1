use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("time horizon must be positive, got {0}")]
    NonPositiveHorizon(f64),
    #[error("time grid needs at least one step")]
    ZeroSteps,
    #[error("non-finite value in path {path} at step {step}")]
    NumericalBlowup { step: usize, path: usize },
    #[error("convex combination weight {0} outside [0, 1]")]
    AlphaOutOfRange(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("sample deviation {deviation:e} is below the degeneracy tolerance {tolerance:e}")]
    DegenerateSample { deviation: f64, tolerance: f64 },
    #[error("normal equations are singular ({0} basis functions)")]
    RankDeficient(usize),
    #[error("risk adjustment is non-positive ({value}) at path {path}, step {step}")]
    NonPositiveAdjustment { path: usize, step: usize, value: f64 },
    #[error("invalid allocation bounds: {0}")]
    InvalidBounds(String),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("artifact mismatch: {0}")]
    ArtifactMismatch(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Stable snake_case name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonPositiveHorizon(_) => "non_positive_horizon",
            Error::ZeroSteps => "zero_steps",
            Error::NumericalBlowup { .. } => "numerical_blowup",
            Error::AlphaOutOfRange(_) => "alpha_out_of_range",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::DegenerateSample { .. } => "degenerate_sample",
            Error::RankDeficient(_) => "rank_deficient",
            Error::NonPositiveAdjustment { .. } => "non_positive_adjustment",
            Error::InvalidBounds(_) => "invalid_bounds",
            Error::ConfigInvalid(_) => "config_invalid",
            Error::ArtifactMismatch(_) => "artifact_mismatch",
            Error::Io(_) => "io",
        }
    }
}
