//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Asset with zero union volume.
    #[error("empty-asset: no occupied volume")]
    EmptyAsset,

    /// More parts than palette colours (requires Q >= S).
    #[error("too-many-parts: {parts} parts but palette has {colors} colours")]
    TooManyParts { parts: usize, colors: usize },

    /// PSNR requested over an empty mask.
    #[error("empty-foreground: mask selects no pixels")]
    EmptyForeground,

    /// AP requested with zero ground-truth segments.
    #[error("no-ground-truth: S = 0")]
    NoGroundTruth,

    /// A signed-distance evaluation produced a non-finite value.
    #[error("geometry-nan: non-finite SDF at ({0}, {1}, {2})")]
    GeometryNan(f64, f64, f64),

    /// Image resolution incompatible with the requested operation.
    #[error("bad-resolution: {0}")]
    BadResolution(String),

    /// Generator parameters cannot be satisfied.
    #[error("infeasible generator spec: {0}")]
    InfeasibleSpec(String),

    /// A required stage input file is missing.
    #[error("missing input: {path}")]
    MissingInput { path: PathBuf },

    /// Configuration file failed validation.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// Malformed argument or precondition violation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Malformed binary or sidecar file.
    #[error("bad file format: {0}")]
    BadFormat(String),

    /// A pipeline stage failed; carries the stage id.
    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("png: {0}")]
    Png(String),
}

impl From<png::EncodingError> for Error {
    fn from(e: png::EncodingError) -> Self {
        Error::Png(e.to_string())
    }
}

impl From<png::DecodingError> for Error {
    fn from(e: png::DecodingError) -> Self {
        Error::Png(e.to_string())
    }
}

impl From<image::ImageError> for Error {
    fn from(e: image::ImageError) -> Self {
        Error::Png(e.to_string())
    }
}
