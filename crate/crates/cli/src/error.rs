use std::path::PathBuf;

/// Failure of a CLI run, grouped by exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid {field}: {message}")]
    Invalid { field: String, message: String },
    #[error("invalid {field}: {source}")]
    Field {
        field: String,
        source: squeeze_core::Error,
    },
    #[error(transparent)]
    Core(#[from] squeeze_core::Error),
    #[error("{0}")]
    Convergence(String),
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;
pub const EXIT_IO: i32 = 4;

impl CliError {
    pub fn invalid(field: &str, message: impl Into<String>) -> Self {
        Self::Invalid {
            field: field.to_owned(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Core(e) | Self::Field { source: e, .. } if e.is_convergence() => EXIT_CONVERGENCE,
            Self::Convergence(_) => EXIT_CONVERGENCE,
            Self::Io { .. } => EXIT_IO,
            _ => EXIT_VALIDATION,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Attaches the offending field name to a library error.
pub trait FieldContext<T> {
    fn field(self, name: &str) -> Result<T>;
}

impl<T> FieldContext<T> for squeeze_core::Result<T> {
    fn field(self, name: &str) -> Result<T> {
        self.map_err(|source| CliError::Field {
            field: name.to_owned(),
            source,
        })
    }
}
