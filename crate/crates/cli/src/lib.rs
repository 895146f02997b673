//! Experiment runner for the short discrete logarithm toolkit: solve
//! instances, verify the distribution and lattice bounds, sweep parameter
//! grids, and emit machine-readable reports.

pub mod checks;
pub mod report;
pub mod run;

pub use report::{emit_report, json_without_timing, ExperimentReport, OutputFormat};
pub use run::{exit_code, run_command, CommandSpec, RunSpec, SolveOpts};
