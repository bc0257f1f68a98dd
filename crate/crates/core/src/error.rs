use thiserror::Error;

use crate::reconstruction::JacobiParameters;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("coupling {index} has vanishing magnitude {magnitude:e}")]
    ZeroCoupling { index: usize, magnitude: f64 },

    #[error("eigensolver did not converge within {max_iterations} iterations")]
    ConvergenceFailure { max_iterations: usize },

    #[error("degenerate spectrum: gap {gap:e} after eigenvalue {index} is below tolerance {tolerance:e}")]
    DegenerateSpectrum {
        index: usize,
        gap: f64,
        tolerance: f64,
    },

    #[error("spectra overlap: e[{index}] and e'[{other}] differ by {distance:e} (tolerance {tolerance:e})")]
    SpectraOverlap {
        index: usize,
        other: usize,
        distance: f64,
        tolerance: f64,
    },

    #[error("field strength {0:e} is indistinguishable from zero")]
    ZeroField(f64),

    #[error("all recovered weights vanished")]
    EmptyMeasure,

    #[error("three-term recurrence broke down at coupling {index}")]
    ReconstructionBreakdown {
        index: usize,
        partial: Box<JacobiParameters>,
    },

    #[error("spectral measures disagree on node {index} by {distance:e}")]
    NodeMismatch { index: usize, distance: f64 },

    #[error("site {site} cannot be phase-linked to the pivot for eigenvector {eigen_index}")]
    DisconnectedPhaseGraph { eigen_index: usize, site: usize },

    #[error("inconsistent data: {0}")]
    InconsistentData(String),
}
