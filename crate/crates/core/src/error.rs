use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("zero-norm view {view}")]
    ZeroNormView { view: usize },

    #[error("descriptor shape mismatch: expected {expected} values, got {got}")]
    DescriptorShape { expected: usize, got: usize },

    #[error("feature dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("invalid tracklet: {0}")]
    InvalidTracklet(String),

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("frame {got} is not after previous frame {previous}")]
    FrameOrder { previous: u64, got: u64 },

    #[error("cost matrix contains NaN at ({row}, {col})")]
    NanCost { row: usize, col: usize },

    #[error("cost matrix is ragged: row {row} has {got} columns, expected {expected}")]
    RaggedMatrix { row: usize, expected: usize, got: usize },

    #[error("gallery: {0}")]
    Gallery(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("invalid region of interest '{name}': {reason}")]
    InvalidRegion { name: String, reason: String },

    #[error("unsupported format_version {found} in {what} (expected {expected})")]
    Version { what: String, found: u64, expected: u64 },

    #[error("frame {frame}, detection {index}: feature blob has {bytes} bytes, expected {expected}")]
    FeatureLength { frame: u64, index: usize, bytes: usize, expected: usize },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("parse error in {what}: {message}")]
    Parse { what: String, message: String },

    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl Error {
    /// Stable machine-readable code, used by the CLI error record.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidBox(_) => "E_BOX",
            Error::NonFinite(_) => "E_NONFINITE",
            Error::ZeroNormView { .. } => "E_ZERO_VIEW",
            Error::DescriptorShape { .. } => "E_DESCRIPTOR_SHAPE",
            Error::DimensionMismatch(..) => "E_DIMENSION",
            Error::InvalidTracklet(_) => "E_TRACKLET",
            Error::InvalidTrajectory(_) => "E_TRAJECTORY",
            Error::InvalidConfig(_) => "E_CONFIG",
            Error::FrameOrder { .. } => "E_FRAME_ORDER",
            Error::NanCost { .. } => "E_NAN_COST",
            Error::RaggedMatrix { .. } => "E_RAGGED",
            Error::Gallery(_) => "E_GALLERY",
            Error::Empty(_) => "E_EMPTY",
            Error::InvalidRegion { .. } => "E_REGION",
            Error::Version { .. } => "E_VERSION",
            Error::FeatureLength { .. } => "E_FEATURE_LENGTH",
            Error::Schema(_) => "E_SCHEMA",
            Error::Parse { .. } => "E_PARSE",
            Error::Io { .. } => "E_IO",
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }

    pub(crate) fn parse(what: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse { what: what.into(), message: message.to_string() }
    }
}
