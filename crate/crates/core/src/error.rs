use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Reasons a coordinate vector is not a single essential curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CoordError {
    Length,
    Empty,
    Parity,
    TriangleIneq,
    Disconnected,
    Peripheral,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("puncture count must be 5 or 6, got {0}")]
    InvalidPunctureCount(usize),
    #[error("not a permutation of the puncture labels: {0:?}")]
    InvalidCycle(Vec<u8>),
    #[error("unknown surface: {0}")]
    UnknownSurface(String),
    #[error("puncture label out of range: {0}")]
    LabelOutOfRange(u8),
    #[error("a curve needs two distinct punctures")]
    SamePuncture,
    #[error("invalid coordinates: {kind:?} ({detail})")]
    Coords { kind: CoordError, detail: String },
    #[error("curves live on different surfaces")]
    SurfaceMismatch,
    #[error("curve does not bound a twice-punctured disk")]
    NotPants,
    #[error("curve does not cut the subsurface")]
    DoesNotCut,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("nothing found under cap: {0}")]
    NotFoundUnderCap(String),
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
    #[error("audit failed: {0}")]
    Audit(String),
    #[error("io: {0}")]
    Io(String),
    #[error("format: {0}")]
    Format(String),
}

impl Error {
    pub fn coords(kind: CoordError, detail: impl Into<String>) -> Self {
        Error::Coords { kind, detail: detail.into() }
    }

    /// Cap exhaustion is a resource problem, not a contradiction.
    pub fn is_cap_exhaustion(&self) -> bool {
        matches!(self, Error::NotFoundUnderCap(_) | Error::ResourceCap(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
