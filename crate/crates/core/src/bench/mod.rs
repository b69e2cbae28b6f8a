//! Experiment configuration, Example 1 reproduction, `(b₃, p₃)` sweeps,
//! reports and the command line.

pub mod cli;
pub mod config;
pub mod report;
pub mod sweep;

pub use config::{Experiment, ExperimentConfig, Format};
pub use report::{
    run_example1, run_experiment, run_repetitions, Example1Overrides, SolveOutcome, SolveReport,
};
pub use sweep::{parse_grid, run_sweep_b3p3, SweepReport};
