use thiserror::Error;

/// Errors raised anywhere in the discretization pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("degenerate element {element}: |det J| = {det:e}")]
    DegenerateElement { element: usize, det: f64 },

    #[error("zero-length face {0}")]
    DegenerateFace(usize),

    #[error("quadrature exactness {requested} exceeds the maximum supported ({max})")]
    QuadratureUnsupported { requested: usize, max: usize },

    #[error("boundary predicate returned `interior` for boundary face {0}")]
    InteriorTagOnBoundary(usize),

    #[error("boundary face {0} carries no boundary tag")]
    MissingBoundaryTag(usize),

    #[error("stabilization must be positive on every face, got tau = {0}")]
    NonPositiveTau(f64),

    #[error(
        "singular local system on element {element} (reciprocal condition estimate {rcond:e})"
    )]
    SingularLocal { element: usize, rcond: f64 },

    #[error("sparse trace system ({dofs} dofs) could not be factorized: {reason}")]
    SingularTrace { dofs: usize, reason: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("fixed-point coupling did not converge in {iterations} iterations (last increment {increment:e})")]
    CouplingDiverged { iterations: usize, increment: f64 },

    #[error("convergence table: {0}")]
    Eoc(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
