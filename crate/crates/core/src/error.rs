use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unknown config key `{key}` (line {line}); valid keys: {valid}")]
    UnknownKey {
        key: String,
        line: usize,
        valid: String,
    },

    #[error("malformed config line {line}: `{text}`")]
    MalformedLine { line: usize, text: String },

    #[error("unknown preset `{0}`; available: fig1, fig2, uncoupled, oracle-small")]
    UnknownPreset(String),

    #[error("coupling vector vanishes identically; no transition can be proposed")]
    NoCoupling,

    #[error("branch enumeration refused for {n_steps} steps (limit {limit})")]
    TooManySteps { n_steps: usize, limit: usize },

    #[error("need at least two trajectories for error bars, got {0}")]
    TooFewTrajectories(usize),

    #[error("{0} trajectories produced non-finite weights")]
    NumericFailure(usize),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
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
