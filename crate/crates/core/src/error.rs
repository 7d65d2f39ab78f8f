use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("basis truncation: level {needed} exceeds n_max = {n_max}")]
    Truncation { needed: usize, n_max: usize },

    #[error("cell partition failed: {0}")]
    CellPartition(String),

    #[error("cell {cell}: {states} states, at least {required} required")]
    TooFewStates { cell: usize, states: usize, required: usize },

    #[error("eigensolver did not converge for cell {cell}")]
    NoConvergence { cell: usize },

    #[error("degenerate spectrum: E_max - E_min = {spread:e}")]
    Degenerate { spread: f64 },

    #[error("coupling maximum sits on the edge of cell {cell}")]
    NonInteriorMaximum { cell: usize },

    #[error("|J''| = {value:e} is too close to zero at r = {r}")]
    NearZeroDerivative { r: f64, value: f64 },

    #[error("coherent-state tail beyond n_max is {tail:e}")]
    TruncationTail { tail: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid does not cover the field: edge/peak ratio {ratio:e}")]
    GridCoverage { ratio: f64 },

    #[error("field has no strict local maxima")]
    NoMaxima,

    #[error("{n_phi} angular samples are not divisible by fold {fold}")]
    Divisibility { n_phi: usize, fold: usize },

    #[error("orbit left the escape radius {radius} at tau = {tau}")]
    Escape { radius: f64, tau: f64 },

    #[error("{have} section points, at least {need} required")]
    InsufficientPoints { have: usize, need: usize },

    #[error("mismatched inputs: {0}")]
    Mismatch(String),
}
