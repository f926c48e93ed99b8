//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("polynomial must have a nonzero leading coefficient")]
    ZeroLeadingCoefficient,

    #[error("numerator and denominator share a root near {root} (non-reduced representation)")]
    NonReduced { root: num_complex::Complex64 },

    #[error("rational map degree {degree} below the required minimum of {min}")]
    DegreeTooLow { degree: usize, min: usize },

    #[error("root finder did not converge after {iterations} iterations (residual {residual:.3e})")]
    RootFinding { iterations: usize, residual: f64 },

    #[error("curve is not simple: segments {i} and {j} intersect")]
    SelfIntersection { i: usize, j: usize },

    #[error("curve needs at least {min} vertices, got {got}")]
    TooFewVertices { min: usize, got: usize },

    #[error("query point lies within tolerance of the curve (ambiguous membership)")]
    AmbiguousPoint,

    #[error("curve passes within {dist:.3e} of a puncture (singular metric)")]
    SingularMetric { dist: f64 },

    #[error("curve continuation passed within margin of a critical value near {near}")]
    BranchAmbiguity { near: num_complex::Complex64 },

    #[error("lift failed to close after {laps} base laps (gap {gap:.3e})")]
    ContinuationFailure { laps: usize, gap: f64 },

    #[error("no fundamental-annulus copy within horizon {horizon} has a forward orbit avoiding the curve interior")]
    NoSafeCopy { horizon: usize },

    #[error("boundary curves closer than two grid cells at resolution {resolution} (under-resolved ring)")]
    UnderResolved { resolution: usize },

    #[error("Laplace solver did not reach tolerance after {sweeps} sweeps (residual {residual:.3e})")]
    LaplaceNonConvergence { sweeps: usize, residual: f64 },

    #[error("no round annulus embeds in the image region (inner boundary reaches the unit circle)")]
    NoEmbedding,

    #[error("blend ring too thin: dilatation sup-norm {sup_norm:.3} at p = {p}")]
    SurgeryTooThin { p: f64, sup_norm: f64 },

    #[error("surgery configuration invalid: {reason}")]
    BadSurgeryConfig { reason: String },

    #[error("orbit of the transplant target re-enters the blend support at step {step}")]
    SafeCopyViolation { step: usize },

    #[error("field support touches the lattice boundary (frequency-domain wraparound would contaminate the transform)")]
    WraparoundContamination,

    #[error("Beltrami solver did not converge in {max_iter} iterations (increment {increment:.3e}); sup-norm too close to 1 for this grid")]
    MrmtNonConvergence { max_iter: usize, increment: f64 },

    #[error("straightening failed: fit residual {residual:.3e} exceeds {limit}")]
    StraighteningFailure { residual: f64, limit: f64 },

    #[error("equipotential level {rho} too deep: {reason}")]
    LevelTooDeep { rho: f64, reason: String },

    #[error("map is not a polynomial (this operation requires an attracting fixed point at infinity)")]
    NotPolynomial,

    #[error("config error: {0}")]
    Config(String),

    #[error("experiment stage `{stage}` failed: {message}")]
    Stage { stage: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable numeric code, shared with the C API.
    pub fn code(&self) -> i32 {
        match self {
            Error::ZeroLeadingCoefficient => 10,
            Error::NonReduced { .. } => 11,
            Error::DegreeTooLow { .. } => 12,
            Error::RootFinding { .. } => 13,
            Error::SelfIntersection { .. } => 20,
            Error::TooFewVertices { .. } => 21,
            Error::AmbiguousPoint => 22,
            Error::SingularMetric { .. } => 23,
            Error::BranchAmbiguity { .. } => 24,
            Error::ContinuationFailure { .. } => 25,
            Error::NoSafeCopy { .. } => 26,
            Error::UnderResolved { .. } => 30,
            Error::LaplaceNonConvergence { .. } => 31,
            Error::NoEmbedding => 32,
            Error::SurgeryTooThin { .. } => 40,
            Error::BadSurgeryConfig { .. } => 41,
            Error::SafeCopyViolation { .. } => 42,
            Error::WraparoundContamination => 50,
            Error::MrmtNonConvergence { .. } => 51,
            Error::StraighteningFailure { .. } => 52,
            Error::LevelTooDeep { .. } => 60,
            Error::NotPolynomial => 61,
            Error::Config(_) => 70,
            Error::Stage { .. } => 71,
            Error::Io(_) => 80,
        }
    }
}
