use std::path::PathBuf;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("missing frame {index} in {}", dir.display())]
    MissingFrame { dir: PathBuf, index: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("unsupported pixel encoding in {}: {detail}", path.display())]
    BadEncoding { path: PathBuf, detail: String },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image codec error on {}: {source}", path.display())]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("malformed json in {}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("clip has {available} frames, {needed} required")]
    InsufficientFrames { needed: usize, available: usize },

    #[error("affine transform is not invertible (det = {det})")]
    BadTransform { det: f64 },

    #[error("unknown instance id `{0}`")]
    UnknownInstance(String),

    #[error("invalid cost matrix: {0}")]
    InvalidCost(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no provenance record at {}", .0.display())]
    MissingProvenance(PathBuf),

    #[error("invalid value: {0}")]
    InvalidValue(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn shape(what: impl Into<String>) -> Self {
        Error::ShapeMismatch(what.into())
    }
}
