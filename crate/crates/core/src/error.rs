use std::fmt;

/// Errors raised while parsing a configuration file.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Syntax { line: usize, msg: String },
    UnknownKey { line: usize, key: String },
    UnknownSection { line: usize, section: String },
    Duplicate { key: String, first: usize, second: usize },
    Missing { key: String },
    Type { line: usize, key: String, expected: &'static str },
    Invalid { key: String, msg: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Syntax { line, msg } => write!(f, "line {line}: syntax error: {msg}"),
            ConfigError::UnknownKey { line, key } => write!(f, "line {line}: unknown key `{key}`"),
            ConfigError::UnknownSection { line, section } => {
                write!(f, "line {line}: unknown section [{section}]")
            }
            ConfigError::Duplicate { key, first, second } => {
                write!(f, "duplicate key `{key}` on lines {first} and {second}")
            }
            ConfigError::Missing { key } => write!(f, "missing required key `{key}`"),
            ConfigError::Type { line, key, expected } => {
                write!(f, "line {line}: `{key}` expects {expected}")
            }
            ConfigError::Invalid { key, msg } => write!(f, "invalid `{key}`: {msg}"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("domain too small: {0}")]
    DomainTooSmall(String),

    #[error("query {q} outside grid axis [{lo}, {hi}]")]
    OutOfDomain { q: f64, lo: f64, hi: f64 },

    #[error("light-cone violation: {0}")]
    LightCone(String),

    #[error("time {t} is not a stored level (history covers [0, {t_max}] in steps of {dt})")]
    BeyondHistory { t: f64, t_max: f64, dt: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("transport speed a = {0} must lie in (-1, 1)")]
    SpeedOutOfRange(f64),

    #[error("iterates coincide: contraction ratio undefined")]
    ZeroDistance,

    #[error("config: {0}")]
    Config(ConfigError),

    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("audit failed: {0}")]
    Audit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<ConfigError> for Error {
    fn from(e: ConfigError) -> Self {
        Error::Config(e)
    }
}

impl Error {
    /// Process exit code: 1 for validation failures, 2 for runtime assertions.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidGrid(_)
            | Error::DomainTooSmall(_)
            | Error::Unsupported(_)
            | Error::SpeedOutOfRange(_)
            | Error::Config(_) => 1,
            Error::AtStep { source, .. } => source.exit_code().max(2),
            _ => 2,
        }
    }

    pub(crate) fn at_step(self, step: usize) -> Self {
        match self {
            e @ Error::AtStep { .. } => e,
            e => Error::AtStep { step, source: Box::new(e) },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
