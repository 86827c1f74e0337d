use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point ({re}, {im}) lies outside the domain of `{map}`")]
    Domain { map: String, re: f64, im: f64 },

    #[error("undefined at ({re}, {im}): {reason}")]
    Undefined { re: f64, im: f64, reason: String },

    #[error("curve leaves the grid bounds: {0}")]
    OutOfBounds(String),

    #[error("inadmissible density: {0}")]
    InadmissibleDensity(String),

    #[error("inadmissible eta: integral {integral} is below 1")]
    InadmissibleEta { integral: f64 },

    #[error("degenerate condenser: {0}")]
    DegenerateCondenser(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("data quality: {0}")]
    DataQuality(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("usage: {0}")]
    Usage(String),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
