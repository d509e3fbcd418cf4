use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("kernel `{kernel}` expects {expected}-dimensional points, got dimension {got}")]
    DimensionMismatch {
        kernel: String,
        expected: String,
        got: usize,
    },

    #[error("sample has {n} points but kernel degree is {m}")]
    TooFewPoints { n: usize, m: usize },

    #[error("{count} kernel values exceed the materialization cap of {cap}")]
    CapExceeded { count: u128, cap: u64 },

    #[error("kernel `{0}` has no fast selection path")]
    NoFastPath(String),

    #[error("unknown kernel `{0}` (expected walsh, mean:<m> or dist:<euclidean|manhattan|chebyshev>)")]
    UnknownKernel(String),

    #[error("asymptotic normality hypothesis violated: {hypothesis} (estimate {value})")]
    Hypothesis { hypothesis: &'static str, value: f64 },

    #[error("degenerate kernel values: {0}")]
    Degenerate(String),

    #[error("no oracle constants for {0}")]
    NoOracle(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unrecognized keys: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
