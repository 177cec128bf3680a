use thiserror::Error;

use crate::parser::ParseError;

/// Domain errors. Each variant carries a stable code (see [`CrnError::code`]).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CrnError {
    #[error("dimension mismatch: expected {expected} entries, got {got}")]
    Dim { expected: usize, got: usize },

    #[error("state became negative ({value:e} in species {species}) at t = {time}; step size too large")]
    Negative { species: usize, value: f64, time: f64 },

    #[error("adaptive step size underflow at t = {time} (h = {step:e})")]
    StepUnderflow { time: f64, step: f64 },

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("negative entry {value} in coherent-state mean for species {species}")]
    NegativeMean { species: usize, value: f64 },

    #[error("time step {dt} exceeds the stability bound {bound}")]
    TimeStep { dt: f64, bound: f64 },

    #[error("operators live on different truncation boxes ({left:?} vs {right:?})")]
    BoxMismatch { left: Vec<u64>, right: Vec<u64> },

    #[error("no probability mass in sector w·n = {lambda}")]
    EmptySector { lambda: i64 },

    #[error("exp(s·w·n) overflows for s = {s} (max exponent {exponent})")]
    Overflow { s: f64, exponent: f64 },

    #[error("species {species} count {count} exceeded the safety cap {cap}")]
    Explode { species: usize, count: u64, cap: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl CrnError {
    pub fn code(&self) -> &'static str {
        match self {
            CrnError::Dim { .. } => "E_DIM",
            CrnError::Negative { .. } => "E_NEG",
            CrnError::StepUnderflow { .. } => "E_STEP",
            CrnError::NoConvergence(_) => "E_NOCONV",
            CrnError::NegativeMean { .. } => "E_NEGC",
            CrnError::TimeStep { .. } => "E_DT",
            CrnError::BoxMismatch { .. } => "E_BOX",
            CrnError::EmptySector { .. } => "E_EMPTY_SECTOR",
            CrnError::Overflow { .. } => "E_OVERFLOW",
            CrnError::Explode { .. } => "E_EXPLODE",
            CrnError::InvalidArgument(_) => "E_ARG",
            CrnError::Parse(p) => p.code(),
        }
    }
}

pub type Result<T, E = CrnError> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(CrnError::Dim { expected, got })
    }
}
