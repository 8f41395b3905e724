//! Run orchestration: configuration, `series.csv`, `report.json`,
//! checkpoints and the `simulate` / `diagnose` / `sweep` / `fit` drivers.

pub mod checkpoint;
pub mod config;
pub mod report;
pub mod run;
pub mod series;
pub mod sweep;

pub use config::{ConfigError, ConfigMap, InitFamily, ModelKind, RunConfig, OUTPUT_ROOT_ENV};
pub use report::{Report, RunStatus, SeriesSummary};
pub use run::{diagnose, fit, simulate, simulate_in, RunError, RunOutcome, SimulateOptions};
pub use sweep::{sweep, SweepRow};
