use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot decode image {path}: {message}")]
    Decode { path: PathBuf, message: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("class {class} has {count} sample(s), at least {required} required")]
    InsufficientClassSamples {
        class: u8,
        count: usize,
        required: usize,
    },

    #[error("requested {target} samples of class {class} but only {available} available")]
    TargetExceedsAvailable {
        class: u8,
        target: usize,
        available: usize,
    },

    #[error("requested {target} samples of class {class}, below its current count {current}")]
    TargetBelowCurrent {
        class: u8,
        target: usize,
        current: usize,
    },

    #[error("class {0} has no samples")]
    EmptyClass(u8),

    #[error("class {0} has a single sample; interpolation needs two")]
    SingletonClass(u8),

    #[error("imbalance ratio needs {needed} majority samples but only {available} available")]
    InsufficientMajority { needed: usize, available: usize },

    #[error("linear system is numerically singular (pivot {pivot:e} at column {column})")]
    SingularSystem { column: usize, pivot: f64 },

    #[error("non-finite value in {0}")]
    NonFiniteInput(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("malformed model file: {0}")]
    Format(String),

    #[error("unsupported model format version {found} (expected {expected})")]
    VersionMismatch { found: u64, expected: u64 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
