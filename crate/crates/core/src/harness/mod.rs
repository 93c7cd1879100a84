//! Scenario configuration, paired runs of both routing modes, parameter
//! sweeps and CSV/summary output.

pub mod config;
pub mod emit;
pub mod oracle;
pub mod run;
pub mod sweep;

pub use config::{ConstellationConfig, GridConfig, RunConfig, ScenarioConfig};
pub use emit::{
    emit, metrics_rows, read_sweep_csv, read_trace_csv, run_summary, sweep_summary, write_metrics_csv, write_oracle_csv,
    write_sweep_csv, write_trace_csv, MetricsRow,
};
pub use oracle::{path_oracle, OracleCase, OracleReport, OracleSpec};
pub use run::{run_scenario, run_scenario_traced, run_workload, simulate_mode, ModeMetrics, PlanRecord, RunMetrics};
pub use sweep::{seed_range, sweep, sweep_with, SweepPoint, SweepResult};
