//! Social-rate sweep, scene-setting ablation and competence calibration.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use taa_core::learner::{Curriculum, LearnerState};
use taa_core::semantics::Configuration;
use taa_core::tutor::SceneIntervention;
use taa_core::Competence;

use crate::config::ExperimentConfig;
use crate::eval::{eval_transition, Agent};
use crate::run::RunError;
use crate::stats::{mean, paired_sign_test_lower, stderr};
use crate::trainer::{StepMode, Trainer};

/// Default social-rate grid.
pub const BETA_GRID: [f64; 6] = [0.0, 0.1, 0.2, 0.5, 0.8, 1.0];

/// Settings under which the social rate matters at three blocks: little random exploration and
/// a learning-progress curriculum.
pub fn hard_setting() -> ExperimentConfig {
    ExperimentConfig {
        n_blocks: 3,
        episodes: 400,
        epsilon: 0.05,
        curriculum: Curriculum::LearningProgress,
        describe: false,
        ..ExperimentConfig::default()
    }
}

/// Episode after which every configuration is discovered, or `None` when the budget of
/// `config.episodes` runs out.
pub fn episodes_to_full_discovery(config: &ExperimentConfig) -> Result<Option<u64>, RunError> {
    let mut trainer = Trainer::new(config.clone())?;
    let total = trainer.graph().len();
    for _ in 0..config.episodes {
        let record = trainer.step(StepMode::Scheduled)?.expect("scheduled episodes always run");
        if record.discovered == total {
            return Ok(Some(record.episode));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub beta: f64,
    /// Censored runs count as the budget.
    pub mean: f64,
    pub stderr: f64,
    pub censored: usize,
    pub episodes: Vec<Option<u64>>,
}

impl SweepRow {
    pub const CSV_HEADER: &'static str = "beta,mean,stderr,censored,seeds";

    pub fn csv_row(&self) -> String {
        format!("{},{:.3},{:.3},{},{}", self.beta, self.mean, self.stderr, self.censored, self.episodes.len())
    }
}

/// Episodes to full discovery for every (beta, seed); one row per beta.
pub fn sweep_beta(base: &ExperimentConfig, betas: &[f64], seeds: &[u64]) -> Result<Vec<SweepRow>, RunError> {
    let jobs: Vec<(usize, u64)> = (0..betas.len()).flat_map(|b| seeds.iter().map(move |&s| (b, s))).collect();
    let results = jobs
        .par_iter()
        .map(|&(b, seed)| {
            let config = ExperimentConfig { beta: betas[b], seed, output: None, ..base.clone() };
            episodes_to_full_discovery(&config)
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    let budget = base.episodes as f64;
    Ok(betas
        .iter()
        .zip(results.chunks(seeds.len().max(1)))
        .map(|(&beta, episodes)| {
            let values: Vec<f64> = episodes.iter().map(|e| e.map_or(budget, |e| e as f64)).collect();
            SweepRow {
                beta,
                mean: mean(&values),
                stderr: stderr(&values),
                censored: episodes.iter().filter(|e| e.is_none()).count(),
                episodes: episodes.to_vec(),
            }
        })
        .collect())
}

/// An interior beta whose mean is below both endpoints with non-overlapping one-stderr bars.
pub fn best_interior_beta(rows: &[SweepRow]) -> Option<&SweepRow> {
    let (first, last) = (rows.first()?, rows.last()?);
    rows[1..rows.len().saturating_sub(1)]
        .iter()
        .filter(|r| {
            [first, last].iter().all(|end| r.mean + r.stderr < end.mean - end.stderr)
        })
        .min_by(|a, b| a.mean.total_cmp(&b.mean))
}

fn stack_height(trainer: &Trainer, c: &Configuration) -> usize {
    trainer.graph().scene(c).map_or(0, |s| s.max_stack_height())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationRun {
    pub strategy: SceneIntervention,
    pub seed: u64,
    /// First episode by which a configuration with a stack of at least two blocks was known.
    pub stack2: Option<u64>,
    pub stack3: Option<u64>,
}

pub fn first_stack_discoveries(config: &ExperimentConfig) -> Result<AblationRun, RunError> {
    let mut trainer = Trainer::new(config.clone())?;
    let (mut stack2, mut stack3) = (None, None);
    for _ in 0..config.episodes {
        let record = trainer.step(StepMode::Scheduled)?.expect("scheduled episodes always run");
        let tallest = trainer.learner.discovered.iter().map(|c| stack_height(&trainer, c)).max().unwrap_or(0);
        if tallest >= 2 {
            stack2.get_or_insert(record.episode);
        }
        if tallest >= 3 {
            stack3.get_or_insert(record.episode);
            break;
        }
    }
    Ok(AblationRun { strategy: config.scene_strategy, seed: config.seed, stack2, stack3 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationSummary {
    pub strategy: SceneIntervention,
    pub mean_stack2: f64,
    pub mean_stack3: f64,
    pub stderr_stack3: f64,
    pub censored_stack3: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ablation {
    pub runs: Vec<AblationRun>,
    pub summaries: Vec<AblationSummary>,
    /// Sign test that the first strategy discovers a stack of three earlier than the second,
    /// paired by seed: (wins, non-tied pairs, p).
    pub sign_test: Option<(u64, u64, f64)>,
}

/// First stack discoveries per strategy and seed; censored runs count as the budget.
pub fn ablation_scene_setting(
    base: &ExperimentConfig,
    strategies: &[SceneIntervention],
    seeds: &[u64],
) -> Result<Ablation, RunError> {
    let jobs: Vec<(SceneIntervention, u64)> =
        strategies.iter().flat_map(|&st| seeds.iter().map(move |&s| (st, s))).collect();
    let runs = jobs
        .par_iter()
        .map(|&(scene_strategy, seed)| {
            first_stack_discoveries(&ExperimentConfig { scene_strategy, seed, output: None, ..base.clone() })
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    let budget = base.episodes as f64;
    let stack3_of = |st: SceneIntervention| -> Vec<f64> {
        runs.iter().filter(|r| r.strategy == st).map(|r| r.stack3.map_or(budget, |e| e as f64)).collect()
    };
    let summaries = strategies
        .iter()
        .map(|&st| {
            let s2: Vec<f64> =
                runs.iter().filter(|r| r.strategy == st).map(|r| r.stack2.map_or(budget, |e| e as f64)).collect();
            let s3 = stack3_of(st);
            AblationSummary {
                strategy: st,
                mean_stack2: mean(&s2),
                mean_stack3: mean(&s3),
                stderr_stack3: stderr(&s3),
                censored_stack3: runs.iter().filter(|r| r.strategy == st && r.stack3.is_none()).count(),
            }
        })
        .collect();
    let sign_test = (strategies.len() >= 2).then(|| paired_sign_test_lower(&stack3_of(strategies[0]), &stack3_of(strategies[1])));
    Ok(Ablation { runs, summaries, sign_test })
}

/// Trains one agent per seed and returns the learners.
pub fn train_agents(base: &ExperimentConfig, seeds: &[u64]) -> Result<Vec<LearnerState>, RunError> {
    seeds
        .par_iter()
        .map(|&seed| {
            let config = ExperimentConfig { seed, output: None, ..base.clone() };
            let mut trainer = Trainer::new(config.clone())?;
            for _ in 0..config.episodes {
                trainer.step(StepMode::Scheduled)?;
            }
            Ok(trainer.learner)
        })
        .collect()
}

/// Mean one-attempt transition success of agents trained and evaluated with `competence`.
pub fn transition_rate(base: &ExperimentConfig, competence: Competence, seeds: &[u64]) -> Result<f64, RunError> {
    let config = ExperimentConfig { competence, ..base.clone() };
    let learners = train_agents(&config, seeds)?;
    let graph = taa_core::graph::GoalGraph::shared(config.world());
    let inventory = taa_core::language::build_inventory(config.n_blocks)?;
    let rates = learners
        .iter()
        .zip(seeds)
        .map(|(learner, &seed)| {
            let agent = Agent { learner, graph: &graph, inventory: &inventory, competence, max_moves: config.max_moves };
            eval_transition(&agent, 1, seed).map(|r| r.rate)
        })
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(mean(&rates))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub competence: Competence,
    pub transition_rate: f64,
    pub iterations: usize,
}

/// Bisection on a factor scaling both `p0` and `p_max` of `base.competence` until the mean
/// one-attempt transition success lies in `[lo, hi]`.
pub fn calibrate(base: &ExperimentConfig, seeds: &[u64], lo: f64, hi: f64) -> Result<Calibration, RunError> {
    let scaled = |s: f64| Competence {
        p0: base.competence.p0 * s,
        p_max: base.competence.p_max * s,
        tau: base.competence.tau,
    };
    let target = (lo + hi) / 2.0;
    let (mut a, mut b) = (0.0, 1.0 / base.competence.p_max);
    let mut best = Calibration { competence: scaled(b), transition_rate: f64::NAN, iterations: 0 };
    for iteration in 1..=30 {
        let s = (a + b) / 2.0;
        let competence = scaled(s);
        let rate = transition_rate(base, competence, seeds)?;
        best = Calibration { competence, transition_rate: rate, iterations: iteration };
        if (lo..=hi).contains(&rate) {
            break;
        }
        if rate < target {
            a = s;
        } else {
            b = s;
        }
    }
    Ok(best)
}
