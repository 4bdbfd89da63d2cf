use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Error type shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("{path}:{line}: loop edge '{vertex} {vertex}' (loops are not allowed)")]
    LoopEdge {
        path: String,
        line: usize,
        vertex: String,
    },

    #[error("{path}:{line}: edge '{x} {y}' listed more than once; list each undirected edge exactly once")]
    DuplicateEdge {
        path: String,
        line: usize,
        x: String,
        y: String,
    },

    #[error("{path}:{line}: nonpositive weight {value} on edge '{x} {y}'")]
    NonpositiveWeight {
        path: String,
        line: usize,
        x: String,
        y: String,
        value: f64,
    },

    #[error("{path}:{line}: nonpositive measure {value} for vertex '{vertex}'")]
    NonpositiveMeasure {
        path: String,
        line: usize,
        vertex: String,
        value: f64,
    },

    #[error("vertex {0} is outside the graph oracle's domain")]
    UnknownVertex(String),

    #[error("duplicate vertex {0} in region request")]
    DuplicateVertex(String),

    #[error("vertex {0} is not in the region")]
    NotInRegion(String),

    #[error(
        "ball enumeration exceeded the vertex budget {budget}; the metric may have infinite balls"
    )]
    BallBudgetExceeded { budget: usize },

    #[error("vertex {0} unreachable from the search root")]
    Unreachable(String),

    #[error("jump size undefined: the region has no internal edges")]
    NoEdges,

    #[error("function not evaluable at {0}")]
    DomainViolation(String),

    #[error("function does not have finite support")]
    InfiniteSupport,

    #[error("region too small: {0}")]
    RegionTooSmall(String),

    #[error("map not convex on [{lo}, {hi}]: second difference {margin:e} at t = {at}")]
    NonConvex {
        lo: f64,
        hi: f64,
        at: f64,
        margin: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A named precondition inequality does not hold for the supplied parameters.
    #[error("parameter constraint violated: {0}")]
    ConstraintViolated(String),

    #[error("Dirichlet problem has an empty interior")]
    EmptyInterior,

    #[error(
        "solver did not converge within {iterations} iterations (relative residual {residual:e})"
    )]
    SolverDiverged { iterations: usize, residual: f64 },

    #[error("potential is not certified positive: infimum {infimum} over the checked set")]
    PotentialNotPositive { infimum: f64 },

    #[error("compatibility hypothesis fails on edge ({x}, {y}): product {value:e} < 0")]
    CompatibilityViolated { x: String, y: String, value: f64 },

    #[error("equation residual {residual:e} at {vertex} exceeds the allowed {tol:e}")]
    ResidualTooLarge {
        vertex: String,
        residual: f64,
        tol: f64,
    },

    #[error("test function must be nonnegative: value {value} at {vertex}")]
    NegativeTestFunction { vertex: String, value: f64 },
}
