use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A tabulated profile was queried outside its sampled range.
    #[error("frequency {omega} outside tabulated range [{lo}, {hi}]")]
    OutOfRange { omega: f64, lo: f64, hi: f64 },

    /// Grid refinement did not reach the requested tolerance.
    #[error("quadrature did not converge: error estimate {estimate:.3e} above threshold {threshold:.3e} at {points} points")]
    Convergence { estimate: f64, threshold: f64, points: usize },

    /// Input that makes the requested quantity undefined (zero norm, zero rate, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Fock-space truncation tail exceeds tolerance.
    #[error("truncation tail bound {bound:.3e} exceeds tolerance {tolerance:.3e}")]
    Truncation { bound: f64, tolerance: f64 },

    /// An operation precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A simulation was asked to run over zero pulses.
    #[error("empty run: no pulses to simulate")]
    EmptyRun,

    #[error("malformed profile table: {0}")]
    Table(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
