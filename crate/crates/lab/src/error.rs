use std::path::PathBuf;

/// Errors of the sweep driver.
#[derive(Debug, thiserror::Error)]
pub enum LabError {
    /// A code, noise or sweep specifier (or option combination) is invalid.
    #[error("invalid specifier: {0}")]
    SpecParse(String),
    /// Reading the config file failed.
    #[error("cannot read config {path}: {source}")]
    Config {
        /// Config path.
        path: PathBuf,
        /// Underlying error.
        source: std::io::Error,
    },
    /// The config file is not valid TOML for the option set.
    #[error("config {path}: {message}")]
    ConfigFormat {
        /// Config path.
        path: PathBuf,
        /// Parser message.
        message: String,
    },
    /// Writing output failed.
    #[error("io error on {path}: {source}")]
    Io {
        /// Output path.
        path: PathBuf,
        /// Underlying error.
        source: std::io::Error,
    },
    /// CSV serialization failed.
    #[error(transparent)]
    Csv(#[from] csv::Error),
    /// Manifest serialization failed.
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    /// The worker pool could not be built.
    #[error("worker pool: {0}")]
    Pool(String),
    /// A simulation error outside any grid point.
    #[error(transparent)]
    Core(#[from] cfsupp::Error),
}

impl LabError {
    pub(crate) fn spec(msg: impl Into<String>) -> Self {
        Self::SpecParse(msg.into())
    }
}
