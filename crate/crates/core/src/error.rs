use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Structural mismatch between values that should share an instance.
    #[error("model error: {0}")]
    Model(String),

    /// Conditioning on an observation that has zero prior probability.
    #[error("conditioning error: {0} has zero probability")]
    Conditioning(String),

    #[error("{what} needs {required} entries, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        required: u128,
        cap: u128,
    },

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// Invalid instance document; `path` names the offending field.
    #[error("schema error{}: {message}", located(path))]
    Schema { path: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

fn located(path: &str) -> String {
    if path.is_empty() {
        String::new()
    } else {
        format!(" at `{path}`")
    }
}

impl Error {
    pub fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn is_cap_exceeded(&self) -> bool {
        matches!(self, Error::CapExceeded { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
