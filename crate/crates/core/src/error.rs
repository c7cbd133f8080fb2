use thiserror::Error;

/// Everything that can go wrong inside the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CullError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("root bracketing failed in k-interval [{lo}, {hi}]: {reason}")]
    BracketFailure { lo: f64, hi: f64, reason: String },

    #[error("{count} bound single-particle states cannot hold {n} Tonks bosons")]
    Unbound { n: usize, count: usize },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConverged {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("Fock basis dimension {dim} exceeds cap {cap}; reduce the number of modes or particles")]
    DimensionCap { dim: usize, cap: usize },

    #[error("mode list has {got} states but the basis was built for {expected}")]
    ModeMismatch { expected: usize, got: usize },

    #[error("eigensolver breakdown: achieved residual {residual:e}")]
    EigenBreakdown { residual: f64 },

    #[error("walker population collapsed to {population} (target {target})")]
    PopulationCollapse { population: usize, target: usize },

    #[error("walker population exploded to {population} (target {target})")]
    PopulationExplosion { population: usize, target: usize },

    #[error("no bracket: {0}")]
    NoBracket(String),

    #[error("position {x} lies outside the box [-{half}, {half}]")]
    OutOfBox { x: f64, half: f64 },

    #[error("{}{message}", line.map(|l| format!("config line {l}: ")).unwrap_or_else(|| "config: ".to_string()))]
    Config { line: Option<usize>, message: String },
}

impl CullError {
    pub fn param(name: &'static str, reason: impl Into<String>) -> Self {
        CullError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of an iterative numerical method (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            CullError::NonConverged { .. }
                | CullError::EigenBreakdown { .. }
                | CullError::PopulationCollapse { .. }
                | CullError::PopulationExplosion { .. }
                | CullError::BracketFailure { .. }
                | CullError::NoBracket(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, CullError>;
