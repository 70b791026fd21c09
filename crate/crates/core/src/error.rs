use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GapError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("pole of the Gamma function at {0}")]
    Pole(f64),
    #[error("series did not converge within {terms} terms (last term {last:e})")]
    Truncation { terms: usize, last: f64 },
    #[error("contour integrand does not decay: tail magnitude {0:e}")]
    ContourNonDecay(f64),
    #[error("parameters too close to a resonance: {0}")]
    NearResonance(String),
    #[error("operator is singular at the requested lambda")]
    SingularOperator,
    #[error("quadrature did not converge: last change {change:e} at order {order}")]
    NotConverged { order: usize, change: f64 },
    #[error("step size collapsed at s = {s}")]
    StepCollapse { s: f64 },
    #[error("conserved quantity drifted by {drift:e} at s = {s}")]
    ConservationDrift { s: f64, drift: f64 },
    #[error("seeding point s0 = {0} too large for the requested tolerance")]
    SeedTooLarge(f64),
    #[error("expansion not available: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, GapError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(GapError::InvalidParameter(msg.into()))
}
