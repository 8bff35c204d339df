use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("frequency window violated: {0}")]
    WindowViolation(String),
    #[error("isometry system admits no positive radii: {0}")]
    NoPositiveSolution(String),
    #[error("closed-form-only space: {0} has no embedding map")]
    ClosedFormOnly(String),
    #[error("family {family} is not available in space {space}")]
    FamilySpaceMismatch { family: String, space: String },
    #[error("surface does not fit in a fundamental domain: {0}")]
    RadiusTooLarge(String),
    #[error("degenerate triangle {face} (aspect ratio {aspect:.3e})")]
    DegenerateTriangle { face: usize, aspect: f64 },
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("non-orientable or non-manifold mesh: {0}")]
    NonManifold(String),
    #[error("normal undefined at vertex {0}")]
    NormalUndefined(usize),
    #[error("no boundary second fundamental form for space {0}")]
    MissingBoundaryForm(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
