use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spin {input:?}: {reason}")]
    InvalidSpin { input: String, reason: String },

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("instance too large: dimension {dimension} exceeds budget {budget}")]
    TooLarge { dimension: u128, budget: usize },

    #[error("eigensolver did not converge in sector 2Sz={twice_sz}")]
    SolverFailure { twice_sz: i64 },

    #[error("eigenvectors are required but the spectrum was computed without them")]
    MissingVectors,

    #[error("temperature must be positive and finite, got {0}")]
    InvalidTemperature(f64),

    #[error("coupling must be positive, got {0}")]
    InvalidCoupling(f64),

    #[error("no crossing: ground energy {ground} is not below the separable bound {bound}")]
    NoCrossing { ground: f64, bound: f64 },

    #[error("could not bracket the crossing after {0} doublings")]
    BracketFailure(usize),

    #[error("closed-form separable bound unavailable: {0}")]
    ClosedFormUnavailable(String),

    #[error("malformed subsystem dimensions {dims:?} for a {dimension}x{dimension} matrix")]
    MalformedDims { dims: Vec<usize>, dimension: usize },

    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}
