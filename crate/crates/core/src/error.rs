use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("spin length must satisfy 2j >= 1, got 2j = {0}")]
    InvalidSpin(u32),

    #[error("boson cutoff must be at least 1, got {0}")]
    InvalidCutoff(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("basis spin length 2j = {basis} does not match model spin length 2j = {model}")]
    SpinMismatch { basis: u32, model: u32 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dense diagonalization is limited to dimension {limit}, got {dim}")]
    DenseTooLarge { dim: usize, limit: usize },

    #[error("squeezed oscillator is unbounded from below for beta = {0} (needs beta > -1/4)")]
    StabilityViolation(f64),

    #[error("{model} requires {requirement}, got kappa = {kappa}")]
    WrongBranch {
        model: &'static str,
        requirement: &'static str,
        kappa: f64,
    },

    #[error("truncated Fock space too small: tail weight {0:e} exceeds 1e-10")]
    TruncationTooSmall(f64),

    #[error("line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
