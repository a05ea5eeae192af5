use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid coordinate: lat {lat}, lon {lon}")]
    InvalidCoordinate { lat: f64, lon: f64 },

    #[error("invalid trajectory `{id}`: {reason}")]
    InvalidTrajectory { id: String, reason: String },

    #[error("invalid bounding box: {0}")]
    InvalidBoundingBox(String),

    #[error("degenerate extent on {axis} axis (min = max = {value})")]
    DegenerateExtent { axis: &'static str, value: f64 },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("dataset is already normalized")]
    AlreadyNormalized,

    #[error("dataset is not normalized")]
    NotNormalized,

    #[error("missing timestamps on trajectory `{0}`")]
    MissingTimestamps(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("no trajectories loaded from {0}")]
    NothingLoaded(PathBuf),

    #[error("neighbour target not found: {0}")]
    TargetNotFound(String),

    #[error("cannot convert privacy unit from {from} to {to}: conversion may only coarsen")]
    UopDirection { from: String, to: String },

    #[error("unmatched trajectory `{0}`")]
    Unmatched(String),

    #[error("I/O error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
