use std::path::PathBuf;

use crate::model::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("building fails validation:\n{0}")]
    InvalidBuilding(ValidationReport),

    #[error("measure `{measure}` cannot be applied: {reason}")]
    Conflict { measure: String, reason: String },

    #[error("measure `{0}` has no cost basis")]
    MissingCostBasis(String),

    #[error("measure `{0}` has a per-m² cost but no envelope area to apply it to")]
    MissingArea(String),

    #[error("unknown measure id `{0}`")]
    UnknownMeasure(String),

    #[error("duplicate measure id `{0}`")]
    DuplicateMeasure(String),

    #[error("catalog has {size} measures; exhaustive enumeration is limited to {limit} (use --max-size to bound package size)")]
    CatalogTooLarge { size: usize, limit: usize },

    #[error("no imported end-use case named `{0}`")]
    MissingCase(String),

    #[error("{path}:{line}: {reason}")]
    Parse { path: String, line: u64, reason: String },

    #[error("{}", format_config_errors(.0))]
    Config(Vec<crate::io::config::ConfigError>),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// I/O failures are distinguished from validation failures by the CLI exit code.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}

fn format_config_errors(errors: &[crate::io::config::ConfigError]) -> String {
    errors.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n")
}
