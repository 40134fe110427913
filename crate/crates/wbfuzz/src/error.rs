use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("schema parse error{}: {msg}", location.as_deref().map(|l| format!(" at {l}")).unwrap_or_default())]
    SchemaParse {
        msg: String,
        location: Option<String>,
    },

    #[error("table/entity reconciliation error: {0}")]
    Reconcile(String),

    #[error("unsupported validation constraint: {0}")]
    UnsupportedConstraint(String),

    #[error("unknown SUT fixture: {0}")]
    UnknownSut(String),

    #[error("harness configuration error: {0}")]
    Harness(String),

    #[error("suite was exported for SUT `{expected}`, refusing to replay against `{actual}`")]
    SutMismatch { expected: String, actual: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn schema(msg: impl Into<String>, location: Option<String>) -> Self {
        Error::SchemaParse {
            msg: msg.into(),
            location,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
