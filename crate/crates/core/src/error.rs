use crate::krylov::SolverStats;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("inverted element {element:?} (pack {pack:?}, lane {lane:?}): det J = {det:e} at gauss point {gauss}")]
    InvertedElement {
        element: Option<usize>,
        pack: Option<usize>,
        lane: Option<usize>,
        gauss: usize,
        det: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("entry ({row}, {col}) is not in the sparsity pattern")]
    PatternMismatch { row: usize, col: usize },

    #[error("singular preconditioner: diagonal entry of row {row} is {value}")]
    SingularPreconditioner { row: usize, value: f64 },

    #[error("CG breakdown at iteration {iteration}: p^T A p = {curvature:e}")]
    Breakdown { iteration: usize, curvature: f64 },

    #[error("pressure solve did not converge after {} iterations", stats.iterations)]
    NotConverged { stats: Box<SolverStats> },

    #[error("non-finite value in {field} at step {step}")]
    NonFinite { field: &'static str, step: usize },

    #[error("unstable time step: CFL number {cfl:.3} exceeds 1")]
    Unstable { cfl: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
