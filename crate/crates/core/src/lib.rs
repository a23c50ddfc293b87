//! Hybrid precoding with reduced phase-shifter analog stages.
//!
//! The crate covers the clustered channel generator, the analog/digital
//! precoder model, the quadratic surrogates of the log-det throughputs, the
//! closed-form and saddle subproblem solvers, and the three penalized
//! alternating-optimization algorithms (max-min, sum, soft max-min).

pub mod algorithms;
pub mod analog;
pub mod channel;
pub mod error;
pub mod linalg;
pub mod precoder;
pub mod scenario;
pub mod solvers;
pub mod surrogates;
pub mod throughput;

pub use analog::{MappingKind, MappingMatrix, PhaseGrid};
pub use channel::{ArrayGeometry, ChannelSet, ClusterConfig};
pub use error::{Error, Result};
pub use precoder::{HybridSystem, PrecoderState};
pub use scenario::Scenario;
pub use throughput::ThroughputReport;
