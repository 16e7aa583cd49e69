//! Experiment harness: a seeded trainer, metrics files, the three evaluation setups, the
//! social-rate sweep and the scene-setting ablation.

pub mod config;
pub mod eval;
pub mod experiments;
pub mod metrics;
pub mod run;
pub mod stats;
pub mod trainer;

pub use config::{ConfigError, ExperimentConfig};
pub use metrics::{MetricsRecord, RecordMode};
pub use run::{run_training, RunError, Summary, TrainingRun};
pub use trainer::{EventKind, StepMode, Trainer, TrainerSnapshot};
