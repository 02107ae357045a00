use alloc::string::String;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid dimension {0}: truncation must be at least 2")]
    InvalidDimension(usize),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("slot {slot} out of range for a space with {modes} modes")]
    SlotOutOfRange { slot: usize, modes: usize },
    #[error("invalid mode specification: {0}")]
    InvalidMode(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("zero denominator in {0}")]
    ZeroDenominator(&'static str),
    #[error("operator is not Hermitian (relative defect {0:e})")]
    NotHermitian(f64),
    #[error("unsupported model: {0}")]
    Unsupported(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("state space too large: {dim} exceeds cap {cap}")]
    ResourceCap { dim: usize, cap: usize },
    #[error("infeasible plan: {0}")]
    Infeasible(String),
    #[error("guard band violated: {0}")]
    GuardBand(String),
    #[error("regime violation: {0}")]
    Regime(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
