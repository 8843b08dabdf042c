use std::fmt;

/// CLI failure, classified by exit code.
#[derive(Debug)]
pub enum BenchError {
    /// Bad invocation (exit 1).
    Usage(String),
    /// Unreadable or malformed input, unwritable output (exit 2).
    Io(String),
    /// Invalid numeric configuration or numeric failure (exit 3).
    Numeric(String),
}

impl BenchError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::Io(_) => 2,
            Self::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for BenchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "usage error: {m}"),
            Self::Io(m) => write!(f, "i/o error: {m}"),
            Self::Numeric(m) => write!(f, "error: {m}"),
        }
    }
}

impl std::error::Error for BenchError {}

impl From<proxsup::Error> for BenchError {
    fn from(e: proxsup::Error) -> Self {
        use proxsup::Error as E;
        match e {
            E::Io(_) | E::MalformedFile(_) | E::Json(_) => Self::Io(e.to_string()),
            E::InvalidParameter(_) | E::DimensionMismatch { .. } | E::DimensionOverflow { .. } => {
                Self::Numeric(e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for BenchError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

pub type BenchResult<T> = Result<T, BenchError>;
