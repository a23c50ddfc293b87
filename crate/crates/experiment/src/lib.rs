//! Seeded sweeps over analog front ends, power accounting and CSV export for
//! the hybrid precoding algorithms in `naosa-core`.

pub mod aggregate;
pub mod config;
pub mod error;
pub mod output;
pub mod power;
pub mod runner;

pub use aggregate::{aggregate, mean_std, Stats, SummaryRow};
pub use config::{ArrayKind, ExperimentConfig, PowerMode, SweepPoint};
pub use error::{ExperimentError, Result};
pub use power::{total_power, transmit_budget_from_total, PowerModel};
pub use runner::{run_experiment, MetricsRecord, RunMetrics};
