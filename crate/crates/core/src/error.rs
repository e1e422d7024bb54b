use thiserror::Error;

/// Errors raised anywhere in the h-function pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("level {level} needs {slits} slits, above the configured maximum of {max}")]
    Capacity { level: u32, slits: u64, max: usize },

    #[error("invalid discretization: {0}")]
    InvalidGrid(String),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("size mismatch: expected {expected} values, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("Krylov solve did not reach tolerance in {iterations} iterations (last relative residual {last:.3e})")]
    SolverNonConvergence {
        iterations: usize,
        last: f64,
        history: Vec<f64>,
    },

    #[error("preimage iteration did not converge in {iterations} steps (last criterion {last:.3e})")]
    MapNonConvergence {
        iterations: usize,
        last: f64,
        history: Vec<f64>,
    },

    #[error("point {point} lies {distance:.3e} from circle {circle}, inside the Cauchy guard {threshold:.3e}")]
    NearBoundary {
        point: String,
        circle: usize,
        distance: f64,
        threshold: f64,
    },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("could not bracket root: {0}")]
    Bracket(String),

    #[error("point coincides with an arc endpoint")]
    ArcEndpoint,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("collocation residual {residual:.3e} above accepted {tolerance:.1e}; raise the basis order")]
    OracleAccuracy { residual: f64, tolerance: f64 },

    #[error("h-curve decreases by {drop:.3e} at r = {r}")]
    Monotonicity { r: f64, drop: f64 },

    #[error("near-threshold sampling failed: {0}")]
    Sampling(String),

    #[error("snapshot: {0}")]
    Snapshot(String),
}

impl Error {
    /// Short machine-readable tag, used by the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Capacity { .. } => "capacity",
            Error::InvalidGrid(_) => "invalid_grid",
            Error::Geometry(_) => "geometry",
            Error::SizeMismatch { .. } => "size_mismatch",
            Error::SolverNonConvergence { .. } => "solver_nonconvergence",
            Error::MapNonConvergence { .. } => "map_nonconvergence",
            Error::NearBoundary { .. } => "near_boundary",
            Error::Singular(_) => "singular",
            Error::Bracket(_) => "bracket",
            Error::ArcEndpoint => "arc_endpoint",
            Error::Domain(_) => "domain",
            Error::OracleAccuracy { .. } => "oracle_accuracy",
            Error::Monotonicity { .. } => "monotonicity",
            Error::Sampling(_) => "sampling",
            Error::Snapshot(_) => "snapshot",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
