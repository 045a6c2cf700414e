//! Error types shared by every module of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by divergence evaluation, structure validation and the
/// solvers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A coordinate fell outside the open domain of a generator or mapping.
    #[error("domain error: coordinate {index} = {value} outside {context}")]
    Domain {
        index: usize,
        value: f64,
        context: String,
    },

    /// A dual value fell outside the image of the gradient (or of a mapping).
    #[error("range error: {value} outside the image of {context}")]
    Range { value: f64, context: String },

    /// A generator is not invertible on the requested hull.
    #[error("generator not invertible on the sample hull: {0}")]
    NotInvertible(String),

    /// The defining relation u = ∇φ ∘ v failed on a probe point.
    #[error("structure mismatch at probe {probe:?}: residual {residual:.3e}")]
    StructureMismatch { probe: Vec<f64>, residual: f64 },

    /// The shared mapping of two structures disagrees on a probe point.
    #[error("mapping mismatch at probe {probe:?}: residual {residual:.3e}")]
    MappingMismatch { probe: Vec<f64>, residual: f64 },

    /// Composition of two structures fails the symmetric positive definite
    /// transitivity condition.
    #[error("incompatible structures at probe {probe:?}: {reason}")]
    Incompatible { probe: Vec<f64>, reason: String },

    /// No generator with a closed-form catalog entry exists for a composition.
    #[error("composition not representable by a catalog generator: {0}")]
    UnsupportedComposition(String),

    /// A weight kind was combined with a structure it cannot analyze.
    #[error("structure error: {0}")]
    Structure(String),

    /// The exponent of a p-norm weight is not of the form 2k/(2k-1).
    #[error("invalid p = {0}: the q-norm path needs p = 2k/(2k-1), k >= 1")]
    InvalidP(f64),

    /// The iterative solver exhausted its budget.
    #[error(
        "no convergence after {iterations} iterations: best residual {residual:.3e} at {best:?}"
    )]
    NoConvergence {
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },

    /// The derivative of the generator changes sign on the sample hull.
    #[error("gradient changes sign on the sample hull [{lo}, {hi}]")]
    SignChange { lo: f64, hi: f64 },

    /// A sample does not carry enough information for the operation.
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    /// A scale weight must be strictly positive.
    #[error("scale weight must be positive, got {0}")]
    NonpositiveWeight(f64),

    /// Contamination weight outside (0, 1 - tau).
    #[error("epsilon {value} outside (0, {max})")]
    EpsilonRange { value: f64, max: f64 },

    /// An operation-specific precondition failed.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Malformed input (CLI grammar, config files, sample schema).
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn domain(index: usize, value: f64, context: impl Into<String>) -> Self {
        Error::Domain {
            index,
            value,
            context: context.into(),
        }
    }

    pub(crate) fn range(value: f64, context: impl Into<String>) -> Self {
        Error::Range {
            value,
            context: context.into(),
        }
    }

    /// Exit code the CLI maps this error to: 3 for solver non-convergence,
    /// 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoConvergence { .. } => 3,
            _ => 2,
        }
    }
}
