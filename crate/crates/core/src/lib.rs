//! Supermarket model on dynamic `d`-regular `2r`-uniform hypergraphs:
//! an exact event-driven simulator, brute-force stationary oracles for small
//! systems, closed-form bounds, and the estimators that check them.

pub mod acceptance;
pub mod analysis;
pub mod engine;
pub mod error;
pub mod hypergraph;
pub mod oracle;
pub mod params;
pub mod queue;
pub mod seed;

pub use engine::{simulate, simulate_with, EngineConfig, Observer, TraceSummary};
pub use error::{OracleError, ParamError, SimError};
pub use hypergraph::LayeredPartition;
pub use oracle::{solve_stationary, CtmcSpec, StationaryDist};
pub use params::{derive_m, ModelParams};
pub use queue::{apply_arrival, apply_service, Fault, QueueVector};
