use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("PLY format error: {0}")]
    Format(String),

    #[error("PLY is missing required property `{0}`")]
    MissingProperty(String),

    #[error("non-finite value in field `{field}` of record {index}")]
    NonFinite { field: String, index: usize },

    #[error("invalid spherical harmonics coefficient count {0}; expected (L+1)^2 for L in 0..=3")]
    ShCoefficients(usize),

    #[error("invalid Gaussian {index}: {reason}")]
    InvalidGaussian { index: usize, reason: String },

    #[error("invalid camera pose: {0}")]
    InvalidPose(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("trace parse error at line {line}: {reason}")]
    Trace { line: usize, reason: String },

    #[error("image size mismatch: {0}x{1} vs {2}x{3}")]
    ImageSize(u32, u32, u32, u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
