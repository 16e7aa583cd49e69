use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig};
use crate::metrics::{MetricsRecord, MetricsWriter, RecordMode};
use crate::trainer::{StepMode, Trainer, TrainerSnapshot};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] taa_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Contents of `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub episodes: u64,
    pub social_episodes: u64,
    pub success_rate: f64,
    pub discovered: usize,
    pub total_configurations: usize,
    /// First episode after which every configuration was discovered.
    pub full_discovery_episode: Option<u64>,
    pub snapshot: TrainerSnapshot,
}

pub struct TrainingRun {
    pub records: Vec<MetricsRecord>,
    pub summary: Summary,
    pub trainer: Trainer,
}

/// Runs `config.episodes` scheduled episodes. With `config.output` set, writes `metrics.jsonl`
/// as episodes complete and `summary.json` at the end.
pub fn run_training(config: &ExperimentConfig) -> Result<TrainingRun, RunError> {
    let mut trainer = Trainer::new(config.clone())?;
    let mut writer = match &config.output {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            Some(MetricsWriter::create(&dir.join("metrics.jsonl"))?)
        }
        None => None,
    };
    let total = trainer.graph().len();
    let mut records = Vec::with_capacity(config.episodes);
    let mut full = None;
    for _ in 0..config.episodes {
        let record = trainer.step(StepMode::Scheduled)?.expect("scheduled episodes always run");
        if full.is_none() && record.discovered == total {
            full = Some(record.episode);
        }
        if let Some(w) = writer.as_mut() {
            w.append(&record)?;
        }
        records.push(record);
    }
    if let Some(w) = writer {
        w.finish()?;
    }
    let successes = records.iter().filter(|r| r.success).count();
    let summary = Summary {
        episodes: records.len() as u64,
        social_episodes: records.iter().filter(|r| r.mode == RecordMode::Social).count() as u64,
        success_rate: successes as f64 / records.len() as f64,
        discovered: trainer.learner.discovered.len(),
        total_configurations: total,
        full_discovery_episode: full,
        snapshot: trainer.snapshot(),
    };
    if let Some(dir) = &config.output {
        write_json(&dir.join("summary.json"), &summary)?;
    }
    Ok(TrainingRun { records, summary, trainer })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Reads a trainer snapshot from either a bare snapshot file or a `summary.json`.
pub fn load_snapshot(path: &Path) -> Result<TrainerSnapshot, RunError> {
    let value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let inner = value.get("snapshot").cloned().unwrap_or(value);
    Ok(serde_json::from_value(inner)?)
}
