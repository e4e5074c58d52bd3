use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid axis has {len} nodes, at least {needed} are required")]
    GridTooSmall { len: usize, needed: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("surface flagged real has imaginary part {im:e} at node ({i}, {j})")]
    NotReal { i: usize, j: usize, im: f64 },

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("path passes within {distance:e} of singularity {point} (exclusion radius {radius:e})")]
    SingularityProximity {
        point: Complex64,
        distance: f64,
        radius: f64,
    },

    #[error("non-finite integrand sample at w = {0}")]
    NonFiniteIntegrand(Complex64),

    #[error("{id} is singular at w = {w}")]
    SingularPoint { id: &'static str, w: Complex64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain violation: {0}")]
    Domain(String),

    #[error("conjugate pair rejected: Cauchy-Riemann violation {violation:e} exceeds {tolerance:e}")]
    NotConjugate { violation: f64, tolerance: f64 },

    #[error("negative discriminant EG - F^2 = {value:e} at node ({i}, {j})")]
    NegativeDiscriminant { i: usize, j: usize, value: f64 },

    #[error("complex discriminant EG - F^2 = {value} at node ({i}, {j})")]
    ComplexDiscriminant { i: usize, j: usize, value: Complex64 },

    #[error("Jacobian degenerate at every node")]
    DegenerateJacobian,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
