use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("n must be positive")]
    EmptyVertexSet,
    #[error("r must be positive")]
    ZeroHalfOrder,
    #[error("d must be positive")]
    ZeroRegularity,
    #[error("n = {n} is not divisible by 2r = {}: hyperedges partition [n] into blocks of 2r vertices", 2 * r)]
    Divisibility { n: u32, r: u32 },
    #[error("arrival rate lambda must be positive and finite, got {0}")]
    ArrivalRate(f64),
    #[error("swap rate kappa must be nonnegative and finite, got {0}")]
    SwapRate(f64),
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("horizon must be positive and finite, got {0}")]
    Horizon(f64),
    #[error("initial queue vector has {got} entries, expected {expected}")]
    InitialQueues { got: usize, expected: usize },
    #[error("initial graph does not match parameters: {0}")]
    InitialGraph(String),
    #[error("observer `{name}` failed at t = {time}: {message}")]
    Observer {
        name: String,
        time: f64,
        message: String,
    },
    #[error("replica {index} failed: {source}")]
    Replica {
        index: usize,
        #[source]
        source: Box<SimError>,
    },
    #[error("{0}")]
    Refused(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("state space of {states} states exceeds the enumeration cap {cap}; {hint}")]
    CapExceeded {
        states: u128,
        cap: u64,
        hint: String,
    },
    #[error("chain has {0} closed communicating classes; the stationary law is not unique")]
    Reducible(usize),
    #[error("stationary solve did not converge: residual {residual:e} after {iterations} sweeps")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("bound is invalid for these parameters: {0}")]
    InvalidBound(String),
    #[error(transparent)]
    Params(#[from] ParamError),
}

#[derive(Debug, Error)]
pub enum PartitionParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("layer {layer} is not a bijection on [n]: {message}")]
    NotBijection { layer: usize, message: String },
}
