use thiserror::Error;

/// Errors raised by the sensing library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("series did not reach tolerance {tol:e} within {terms} terms (last bound {bound:e})")]
    SlowConvergence { tol: f64, terms: usize, bound: f64 },

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("requested IRR {requested_db} dB exceeds the supremum {supremum_db} dB for this phase mismatch")]
    InfeasibleIrr { requested_db: f64, supremum_db: f64 },

    #[error("power amplifier model yields negative distortion variance {0:e}")]
    NegativeVariance(f64),

    #[error("phase-noise leakage is degenerate for a zero oscillator bandwidth")]
    DegenerateLeakage,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("too many secondary users for exact enumeration: {0} > {max}", max = crate::cooperative::MAX_ENUMERATED_SUS)]
    TooManyUsers(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
