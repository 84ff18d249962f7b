use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum HnaError {
    #[error("argument outside the function domain: {0}")]
    Domain(String),
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("basis index {index} out of range for a space of dimension {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("point s = {0} does not lie on the screen")]
    PointInGap(f64),
    #[error("point ({0}, {1}) lies on the closure of the screen")]
    PointOnScreen(f64, f64),
    #[error("adaptive quadrature did not converge after {levels} refinement levels (last change {change:e})")]
    NonConvergence { levels: usize, change: f64 },
    #[error("assembly failed at entry ({row}, {col}): {source}")]
    Assembly {
        row: usize,
        col: usize,
        #[source]
        source: Box<HnaError>,
    },
    #[error("matrix is numerically singular (pivot {0})")]
    Singular(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("configuration mismatch: {0}")]
    Mismatch(String),
    #[error("{0} unknowns exceeds the limit of {1}")]
    TooLarge(usize, usize),
    #[error("invalid system dump: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl HnaError {
    /// True for failures of quadrature or of the linear solver.
    pub fn is_numerical(&self) -> bool {
        match self {
            HnaError::NonConvergence { .. } | HnaError::Singular(_) => true,
            HnaError::Assembly { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, HnaError>;
