use std::path::PathBuf;

use crate::solver::ConvergenceTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid parameters: {0}")]
    Params(String),

    #[error(
        "transmembrane pressure {delta_p} Pa does not exceed the inlet osmotic pressure \
         {osmotic} Pa; this is forward osmosis, not reverse osmosis"
    )]
    ForwardOsmosis { delta_p: f64, osmotic: f64 },

    #[error("invalid mesh: {0}")]
    Mesh(String),

    #[error("msh parse error at line {line}: {msg}")]
    MshParse { line: usize, msg: String },

    #[error("singular matrix: no usable pivot for row {row}")]
    SingularMatrix { row: usize },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("fixed-point iteration did not converge after {} iterations", .trace.iterations)]
    NotConverged { trace: Box<ConvergenceTrace> },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
