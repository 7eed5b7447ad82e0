use thiserror::Error;

/// Errors raised while building or evaluating sets, scenes and mappings.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid set: {0}")]
    InvalidSet(String),

    #[error("polyhedron is empty")]
    InfeasiblePolyhedron,

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("xbar not in intersection: distance to set {set} is {distance:e}")]
    NotInIntersection { set: usize, distance: f64 },

    #[error("declared intersection is inconsistent: {0}")]
    BadIntersection(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("numerical diagnostic: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad input rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Numerical(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
