use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("site {coords:?} lies outside a window of side {side}")]
    OutOfWindow { coords: Vec<usize>, side: usize },

    #[error("operation requires a torus window")]
    NotTorus,

    #[error("configuration has {got} sites, geometry expects {expected}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("invalid mass {value} at site {site}: {reason}")]
    InvalidMass {
        site: usize,
        value: f64,
        reason: &'static str,
    },

    #[error("parameter {0} outside [0, 1]")]
    ParameterRange(f64),

    #[error("coupling parameters must satisfy p1 < p2 < p3, got {0:?}")]
    UnorderedParameters([f64; 3]),

    #[error("invalid measure family: {0}")]
    Family(String),

    #[error("invalid automaton: {0}")]
    Automaton(String),

    #[error("configuration did not stabilize within {cap} topplings")]
    NotStabilized { cap: u64 },

    #[error("unknown cluster label {0}")]
    MissingLabel(usize),

    #[error("cluster labels must differ")]
    SameCluster,

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("malformed binary configuration: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
