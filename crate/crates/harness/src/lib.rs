//! Experiment harness: configuration loading, seeded training runs for the
//! three agents, frozen-checkpoint evaluation, sweep campaigns and CSV
//! outputs.

pub mod config;
pub mod metrics;
pub mod recording;
pub mod run;
pub mod selftest;

pub use config::{AgentConfig, ExperimentConfig, HarnessError};
pub use metrics::{iqr, kendall_tau, median, EpisodeStats};
pub use recording::RecordingEnv;
pub use run::{evaluate_checkpoint, run_sweep, run_training, train_one_seed, EvalAggregate, SweepMode};
