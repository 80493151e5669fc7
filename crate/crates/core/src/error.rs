use std::path::PathBuf;

/// Errors produced by the simulator, reconstruction and registration code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point cloud is empty")]
    EmptyCloud,

    #[error("degenerate correspondence set: {0}")]
    Degenerate(&'static str),

    #[error("no prostate in view")]
    NoProstateInView,

    #[error("sweep exceeded max duration of {max_duration} s")]
    Timeout { max_duration: f64 },

    #[error("contact force {force:.2} N exceeded abort limit {limit:.2} N at t = {t:.2} s")]
    ForceAbort { force: f64, limit: f64, t: f64 },

    #[error("target slice {target:.4} rad outside recorded range [{min:.4}, {max:.4}]")]
    TargetOutOfRange { target: f64, min: f64, max: f64 },

    #[error("sweep with seed {seed} failed: {source}")]
    SweepFailed {
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
