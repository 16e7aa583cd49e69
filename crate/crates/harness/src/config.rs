use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use taa_core::learner::{Curriculum, LearnerParams};
use taa_core::semantics::World;
use taa_core::tutor::SceneIntervention;
use taa_core::Competence;
use thiserror::Error;

/// A configuration field failed validation.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid config field `{field}`: {message}")]
pub struct ConfigError {
    pub field: &'static str,
    pub message: String,
}

fn bad(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError { field, message: message.into() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_blocks: usize,
    pub episodes: usize,
    /// Move attempts per episode.
    pub max_moves: usize,
    pub competence: Competence,
    pub epsilon: f64,
    pub curriculum: Curriculum,
    /// Probability that an episode is social.
    pub beta: f64,
    pub scene_strategy: SceneIntervention,
    pub seed: u64,
    /// Directory for `metrics.jsonl` and `summary.json`.
    pub output: Option<PathBuf>,
    /// The tutor describes every executed move and the learner induces groundings.
    pub describe: bool,
    /// Autotelic episodes between two rehearsals of internalized pairs.
    pub rehearse_every: usize,
    pub mastery_streak: u32,
    pub lp_window: usize,
    pub lp_floor: f64,
    /// Adds real elapsed time to metrics records (breaks byte-identical reruns).
    pub record_wall_clock: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let learner = LearnerParams::default();
        ExperimentConfig {
            n_blocks: 3,
            episodes: 500,
            max_moves: 10,
            competence: Competence::default(),
            epsilon: learner.epsilon,
            curriculum: Curriculum::LearningProgress,
            beta: 0.2,
            scene_strategy: SceneIntervention::RandomScatter,
            seed: 0,
            output: None,
            describe: true,
            rehearse_every: 5,
            mastery_streak: learner.mastery_streak,
            lp_window: learner.lp_window,
            lp_floor: learner.lp_floor,
            record_wall_clock: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let world = World::new(self.n_blocks).map_err(|e| bad("n_blocks", e.to_string()))?;
        if self.episodes < 1 {
            return Err(bad("episodes", "must be at least 1"));
        }
        if self.max_moves < 1 {
            return Err(bad("max_moves", "must be at least 1"));
        }
        self.competence.validate().map_err(|e| bad("competence", e.to_string()))?;
        for (field, v) in [("epsilon", self.epsilon), ("beta", self.beta)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(bad(field, format!("{v} is outside [0, 1]")));
            }
        }
        self.scene_strategy
            .validate(world)
            .map_err(|e| bad("scene_strategy", e.to_string()))?;
        if self.rehearse_every < 1 {
            return Err(bad("rehearse_every", "must be at least 1"));
        }
        self.learner_params().validate().map_err(|e| bad("learner", e.to_string()))?;
        Ok(())
    }

    pub fn world(&self) -> World {
        World::new(self.n_blocks).expect("validated config")
    }

    pub fn learner_params(&self) -> LearnerParams {
        LearnerParams {
            epsilon: self.epsilon,
            lp_window: self.lp_window,
            lp_floor: self.lp_floor,
            mastery_streak: self.mastery_streak,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| bad("json", e.to_string()))?;
        config.validate()?;
        Ok(config)
    }
}
