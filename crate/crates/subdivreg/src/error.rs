use thiserror::Error;

/// Errors shared across the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dilation: {0}")]
    InvalidDilation(String),

    #[error("mask support exceeds the declared bound: {0}")]
    SupportMismatch(String),

    #[error("degenerate mask: {0}")]
    DegenerateMask(String),

    #[error("index set too small to separate polynomials of degree {degree} (|K| = {size})")]
    DegenerateSubspace { degree: usize, size: usize },

    #[error("transformation basis is degenerate on this index set: {0}")]
    DegenerateBasis(String),

    #[error("matrix shape error: {0}")]
    Shape(String),

    #[error("operation outside supported scope: {0}")]
    Unsupported(String),

    #[error(
        "normalization refused: sum-rule defects mu_k are not summable ({0}); \
         rescaling would change the scheme (pass force to override)"
    )]
    NormalizationRefused(String),

    #[error("limit-point set is empty; the analysis needs at least one limit mask")]
    MissingLimitPoints,

    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),

    #[error("unknown matrix fixture `{0}`")]
    UnknownFixture(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("exact-exponent hypotheses not met: {0}")]
    ChecklistFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
