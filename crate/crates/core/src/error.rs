use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("root at distance {distance:e} from the circle |w| = {radius}; perturb the radius")]
    RootOnCircle { radius: f64, distance: f64 },

    #[error("{0} is an atom of the root distribution")]
    AtomicPoint(String),

    #[error("degenerate direction: {0}")]
    Degenerate(String),

    #[error("degree {0} exceeds the coefficient oracle limit of 64")]
    OracleDegree(usize),

    #[error("transport problem too large for the exact solver: {0} x {1}")]
    TransportTooLarge(usize, usize),

    #[error("infeasible transport weights: {0}")]
    InfeasibleWeights(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown diagnostic {name:?}; valid names: {valid}")]
    UnknownDiagnostic { name: String, valid: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
