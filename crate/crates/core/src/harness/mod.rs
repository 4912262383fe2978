//! Config-driven experiment runner behind the `qwalk` binary.

mod config;
mod output;
mod run;

pub use config::{
    validate_config, ExperimentConfig, ExperimentKind, HeatmapScale, InitialConfig, LatticeConfig,
    OutputConfig, OutputFormat, PerSite, Spacing, SweepConfig, ZGridConfig,
};
pub use output::{fmt_f64, grey_levels, LOG_FLOOR};
pub use run::{compute, run_experiment, write_outputs, Carpet, RunResult};
