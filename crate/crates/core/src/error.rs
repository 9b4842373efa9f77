use thiserror::Error;

use crate::monodromy::MonodromyReport;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure mode surfaced by the library.
#[derive(Error, Debug, Clone)]
pub enum Error {
    #[error("matrix has an eigenvalue on the closed negative real axis; principal log undefined")]
    OutOfRadius,

    #[error("matrix is not in the span of the algebra basis (residual {residual:.3e})")]
    NotInAlgebra { residual: f64 },

    #[error("matrix is not a group element of {group} (residual {residual:.3e})")]
    NotInGroup { group: String, residual: f64 },

    #[error("point leaves the constraint locus of {geometry} (residual {residual:.3e})")]
    ConstraintViolated { geometry: String, residual: f64 },

    #[error("action is not transitive: codimension of isotropy is {found}, expected {expected}")]
    NotTransitive { found: usize, expected: usize },

    #[error("r does not normalize the isotropy group (residual {residual:.3e}): {reason}")]
    NotNormalizing { residual: f64, reason: String },

    #[error("no coset representative found for the point (residual {residual:.3e})")]
    RepresentativeNotFound { residual: f64 },

    #[error("unsupported dimension {0}")]
    DimensionUnsupported(usize),

    #[error("rank of the tangent map is ambiguous or jumps at node {node}: {detail}")]
    RankDeficient { node: usize, detail: String },

    #[error("axiom {axiom} violated at node {node} (residual {residual:.3e})")]
    AxiomViolated { axiom: String, node: usize, residual: f64 },

    #[error("section bracket leaves the fiber (distance {residual:.3e})")]
    NotInFiber { residual: f64 },

    #[error("Richardson error estimate {estimate:.3e} exceeds tolerance {tol:.3e}")]
    StepTooLarge { estimate: f64, tol: f64 },

    #[error("paths are not composable (endpoint gap {gap:.3e})")]
    NotComposable { gap: f64 },

    #[error("mesh graph is disconnected ({reached} of {total} nodes reachable from x0)")]
    Disconnected { reached: usize, total: usize },

    #[error("basepoint condition fails: kernel vector {index} moves m0 (residual {residual:.3e})")]
    BasepointMismatch { index: usize, residual: f64 },

    #[error("monodromy is nontrivial (max deviation {:.3e})", .0.max_deviation())]
    NontrivialMonodromy(Box<MonodromyReport>),

    #[error("isotropy drift at node {node}: kernel generator residual {residual:.3e}")]
    IsotropyDrift { node: usize, residual: f64 },

    #[error("no morphism solution at node {node} (residual {residual:.3e})")]
    NoSolution { node: usize, residual: f64 },

    #[error("maps are not related (max deviation {deviation:.3e} at node {node})")]
    NotRelated { deviation: f64, node: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    ParseError(String),

    #[error("validation error at `{key}`: {constraint}")]
    ValidationError { key: String, constraint: String },

    #[error("unknown geometry `{0}`")]
    UnknownGeometry(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
