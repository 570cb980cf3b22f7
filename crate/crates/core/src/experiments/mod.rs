//! Experiment configuration, sweep drivers, result persistence and the
//! self-test suite.

pub mod config;
pub mod records;
pub mod selftest;
pub mod sweep;

pub use config::{ExperimentConfig, ThresholdMode};
pub use records::{
    next_repetition_index, run_metadata, write_records, ConcentrationRecord, ExistingOutput,
    OutputPaths, SweepResultRecord, ThresholdReport, CLASSICAL_ORDER,
};
pub use selftest::{selftest, selftest_with, SelftestReport};
pub use sweep::{
    concentration_tails, run_concentration_experiment, run_fig1_sweep, run_order_sweep,
    run_threshold_report, SweepOptions,
};
