use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("{0}")]
    Validation(String),

    #[error("site masses sum to {sites_total:.17e} but the mesh mass is {mesh_mass:.17e}")]
    Imbalance { sites_total: f64, mesh_mass: f64 },

    #[error("sites {0} and {1} coincide")]
    CoincidentSites(usize, usize),

    #[error("initial Voronoi cells are empty for sites {0:?}")]
    EmptyCells(Vec<usize>),

    #[error("interface graph is disconnected: components {0:?}")]
    DisconnectedAdjacency(Vec<Vec<usize>>),

    #[error("inner linear solve stopped at relative residual {residual:.3e} after {iterations} iterations")]
    LinearSolve { residual: f64, iterations: usize },

    #[error("line search failed at Newton iteration {iteration} after {halvings} halvings")]
    LineSearch { iteration: usize, halvings: usize },

    #[error("cell of site {0} has zero mass")]
    ZeroMassCell(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable category, used by the command-line front end.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Validation(_) => "validation",
            Error::Imbalance { .. } => "imbalance",
            Error::CoincidentSites(..) => "coincident-sites",
            Error::EmptyCells(_) => "initialization",
            Error::DisconnectedAdjacency(_) => "disconnected-adjacency",
            Error::LinearSolve { .. } => "linear-solve",
            Error::LineSearch { .. } => "line-search",
            Error::ZeroMassCell(_) => "zero-mass-cell",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
