//! Command implementations behind the `nliprobe` binary. Each command reads
//! its inputs, writes its outputs under a fixed layout in the output
//! directory (`reports/`, `augmented/`, `models/`, `tables/`) and returns a
//! summary.

pub mod commands;
pub mod config;

pub use commands::{
    cmd_augment, cmd_evaluate, cmd_experiment, cmd_stats, cmd_synth, cmd_train, read_corpus,
    ExperimentRow, ExperimentTable,
};
pub use config::{resolve, Arm, ExperimentSpec};
