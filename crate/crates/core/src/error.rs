//! Crate-wide error type.

use std::fmt;

/// Everything that can go wrong across the solver pipeline.
#[derive(Debug)]
pub enum Error {
    /// Material constants outside the admissible range (non-positive moduli,
    /// Poisson ratio out of (-1, 1/2), ...).
    InvalidMaterial(String),
    /// Scaling exponents outside the supported region, or derived quantities
    /// violating their bounds (e.g. `r/delta` above the configured constant).
    UnsupportedScaling(String),
    /// Rod radius reaches half the period: neighbouring rods touch.
    Penetration { r: f64, epsilon: f64 },
    /// An operation was asked for in a regime where it has no meaning
    /// (e.g. the interface spring constant in a subcritical regime).
    NotApplicable(String),
    /// A point lies outside the structure (in the void between rods, or
    /// outside the blocks altogether).
    Domain(String),
    /// Sampled data with inconsistent shapes or orderings.
    Shape(String),
    /// A grid or quadrature too coarse for the requested operation.
    Resolution(String),
    /// Mesh generation failed to meet a resolution demand.
    Refinement { required: f64, actual: f64 },
    /// The layer contains no rod at all for the given period and domain.
    EmptyLayer,
    /// Cutoff construction parameters violate their constraint
    /// (`r R / epsilon` must stay below 1/2).
    InvalidCutoff(String),
    /// Inconsistent mesh topology (non-positive Jacobian, dangling node, ...).
    Mesh(String),
    /// Linear solver failed to reach the requested residual.
    Solver {
        residual: f64,
        tolerance: f64,
        iterations: usize,
    },
    /// Malformed configuration input.
    Config(String),
    /// Underlying I/O failure.
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidMaterial(m) => write!(f, "invalid material: {m}"),
            Error::UnsupportedScaling(m) => write!(f, "unsupported scaling: {m}"),
            Error::Penetration { r, epsilon } => write!(
                f,
                "rod radius {r} reaches half the period {epsilon}: rods touch"
            ),
            Error::NotApplicable(m) => write!(f, "not applicable: {m}"),
            Error::Domain(m) => write!(f, "point outside structure: {m}"),
            Error::Shape(m) => write!(f, "shape mismatch: {m}"),
            Error::Resolution(m) => write!(f, "insufficient resolution: {m}"),
            Error::Refinement { required, actual } => write!(
                f,
                "mesh too coarse: element size {actual} exceeds required {required}"
            ),
            Error::EmptyLayer => write!(f, "no rod fits inside the domain at this period"),
            Error::InvalidCutoff(m) => write!(f, "invalid cutoff: {m}"),
            Error::Mesh(m) => write!(f, "mesh error: {m}"),
            Error::Solver {
                residual,
                tolerance,
                iterations,
            } => write!(
                f,
                "linear solver stalled at residual {residual:.3e} (tolerance {tolerance:.3e}) after {iterations} iterations"
            ),
            Error::Config(m) => write!(f, "config error: {m}"),
            Error::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}
