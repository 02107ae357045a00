use std::fmt;
use std::path::PathBuf;

use nanolattice_core::Error as CoreError;

/// Position of a problem in an input document (1-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl Location {
    /// Line and column of a byte offset.
    pub fn of_offset(text: &str, offset: usize) -> Self {
        let before = &text[..offset.min(text.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        Self { line, column }
    }
}

/// Malformed or inconsistent input document.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub location: Option<Location>,
    pub message: String,
}

impl ParseError {
    pub fn new(message: impl Into<String>) -> Self {
        Self { location: None, message: message.into() }
    }

    pub fn at(text: &str, offset: usize, message: impl Into<String>) -> Self {
        Self { location: Some(Location::of_offset(text, offset)), message: message.into() }
    }

    pub(crate) fn from_toml(text: &str, e: &toml::de::Error) -> Self {
        match e.span() {
            Some(span) => Self::at(text, span.start, e.message().trim()),
            None => Self::new(e.message().trim()),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.location {
            Some(l) => write!(f, "line {}, column {}: {}", l.line, l.column, self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ParseError {}

/// Every failure the command line can report, each with a fixed exit code.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0}")]
    Tolerance(String),
}

impl AppError {
    /// 0 pass, 1 usage or parse, 2 infeasible compile, 3 resource cap, 4 tolerance failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) | AppError::Parse { .. } | AppError::Io { .. } => 1,
            AppError::Core(CoreError::Infeasible(_) | CoreError::GuardBand(_)) => 2,
            AppError::Core(CoreError::ResourceCap { .. }) => 3,
            AppError::Core(_) => 1,
            AppError::Tolerance(_) => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io { path: path.into(), source }
    }
}

pub type AppResult<T> = Result<T, AppError>;
