//! Experiment orchestration: configuration, CSV output, the `run` and
//! `sweep` commands and the oracle invariant battery.

pub mod commands;
pub mod config;
pub mod oracle_check;
pub mod output;

pub use commands::{
    run_command, run_repetitions, run_resolved, run_sweep, sweep_command, with_jobs, CellOutcome,
    ExitStatus, ExperimentOutcome, RunOptions, SweepAxis, SweepSpec,
};
pub use config::{
    apply_override, set_path, AttackConfig, ConfigError, ExperimentConfig, OracleSection,
    OutputSection, Preset, ResolvedExperiment, ScheduleSection, SigmaName, SigmaSetting,
};
pub use oracle_check::{oracle_check_command, run_battery, BatteryOptions, CheckOutcome};
pub use output::{
    write_summary, write_trace, SummaryRow, CSV_SCHEMA_VERSION, SUMMARY_HEADER, TRACE_HEADER,
};
