use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Two operands were built on different grids, or a buffer has the wrong size.
    #[error("structural mismatch: {0}")]
    Structural(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid viscosity model: {0}")]
    ModelInvalid(String),

    #[error("insufficient horizon: {0}")]
    InsufficientHorizon(String),

    #[error("solution blew up at t = {time}: {reason}")]
    BlowUp { time: f64, reason: String },

    #[error("time step {dt} violates the stability bound {limit} at t = {time}")]
    Stability { time: f64, dt: f64, limit: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("uncertified projection constants: {0}")]
    Uncertified(String),

    #[error("wrong model kind for estimate `{estimate}`: {detail}")]
    WrongModel { estimate: String, detail: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<toml::de::Error> for Error {
    fn from(e: toml::de::Error) -> Self {
        Error::Config(e.to_string())
    }
}

impl From<toml::ser::Error> for Error {
    fn from(e: toml::ser::Error) -> Self {
        Error::Config(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
