//! One learner, one tutor and a scene, stepped episode by episode.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use taa_core::graph::{FrontierPair, GoalGraph};
use taa_core::language::{
    build_inventory, follow_instruction, Expr, GroundingSource, GroundingTable, InstructionContext,
    InstructionOutcome, Inventory,
};
use taa_core::learner::{EpisodeOutcome, LearnerSnapshot, LearnerState};
use taa_core::semantics::{Configuration, Scene};
use taa_core::tutor::{describe, set_scene, EpisodeMode, SceneIntervention, TutorModel};
use taa_core::{Error, Result};

use crate::config::{ConfigError, ExperimentConfig};
use crate::metrics::{MetricsRecord, RecordMode};

/// Which kind of episode to run next.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepMode {
    #[default]
    Scheduled,
    Autotelic,
    Social,
}

/// Something observable happened inside a session.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "payload", rename_all = "snake_case")]
pub enum EventKind {
    SessionCreated { config: ExperimentConfig },
    SceneSet { scene: Scene, configuration: Configuration },
    EpisodeStarted { episode: u64, mode: RecordMode, goal: Configuration },
    MoveExecuted { from: Configuration, intended: Configuration, success: bool, explored: bool },
    GoalDiscovered { configuration: Configuration },
    PairInternalized { pair: FrontierPair },
    EpisodeFinished { episode: u64, goal: Configuration, success: bool, moves: usize },
    MetricUpdate(MetricsRecord),
}

/// Resumable state of a trainer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainerSnapshot {
    pub config: ExperimentConfig,
    pub episode: u64,
    pub learner: LearnerSnapshot,
    pub grounding: GroundingTable,
    pub scene: Scene,
}

pub struct Trainer {
    config: ExperimentConfig,
    graph: Arc<GoalGraph>,
    inventory: Arc<Inventory>,
    pub learner: LearnerState,
    pub tutor: TutorModel,
    pub grounding: GroundingTable,
    scene: Scene,
    /// The current scene was arranged for the next episode and must not be reset.
    scene_pending: bool,
    rng: ChaCha8Rng,
    episode: u64,
    autotelic_episodes: u64,
    record_events: bool,
    events: Vec<EventKind>,
}

impl Trainer {
    pub fn new(config: ExperimentConfig) -> std::result::Result<Self, ConfigError> {
        config.validate()?;
        let world = config.world();
        let graph = GoalGraph::shared(world);
        let inventory = Arc::new(build_inventory(config.n_blocks).map_err(|e| ConfigError {
            field: "n_blocks",
            message: e.to_string(),
        })?);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let scene_err = |e: Error| ConfigError { field: "scene_strategy", message: e.to_string() };
        let scene = set_scene(&config.scene_strategy, &graph, &mut rng).map_err(scene_err)?;
        let mut learner = LearnerState::new(world, config.learner_params(), config.seed);
        let mut tutor = TutorModel::new(graph.clone(), config.beta).map_err(|e| ConfigError {
            field: "beta",
            message: e.to_string(),
        })?;
        let start = scene.extract_config();
        learner.discover(start);
        tutor.observe_config(start);
        Ok(Trainer {
            config,
            graph,
            inventory,
            learner,
            tutor,
            grounding: GroundingTable::new(),
            scene,
            scene_pending: true,
            rng,
            episode: 0,
            autotelic_episodes: 0,
            record_events: false,
            events: Vec::new(),
        })
    }

    /// Buffers events for [`Trainer::drain_events`].
    pub fn with_events(mut self) -> Self {
        self.record_events = true;
        let config = self.config.clone();
        self.emit(EventKind::SessionCreated { config });
        self
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn graph(&self) -> &Arc<GoalGraph> {
        &self.graph
    }

    pub fn inventory(&self) -> &Arc<Inventory> {
        &self.inventory
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn current(&self) -> Configuration {
        self.scene.extract_config()
    }

    /// Episodes run so far.
    pub fn episode(&self) -> u64 {
        self.episode
    }

    pub fn drain_events(&mut self) -> Vec<EventKind> {
        std::mem::take(&mut self.events)
    }

    fn emit(&mut self, event: EventKind) {
        if self.record_events {
            self.events.push(event);
        }
    }

    pub fn snapshot(&self) -> TrainerSnapshot {
        TrainerSnapshot {
            config: self.config.clone(),
            episode: self.episode,
            learner: self.learner.snapshot(),
            grounding: self.grounding.clone(),
            scene: self.scene.clone(),
        }
    }

    /// Replaces the scene; the next episode starts from it.
    pub fn place_scene(&mut self, scene: Scene) -> Result<()> {
        if scene.world() != self.graph.world() {
            return Err(Error::InvalidScene("scene has a different number of blocks".into()));
        }
        let c = scene.extract_config();
        self.scene = scene.clone();
        self.scene_pending = true;
        if self.learner.discover(c) {
            self.emit(EventKind::GoalDiscovered { configuration: c });
        }
        self.tutor.observe_config(c);
        self.emit(EventKind::SceneSet { scene, configuration: c });
        Ok(())
    }

    pub fn intervene(&mut self, intervention: &SceneIntervention) -> Result<()> {
        let scene = set_scene(intervention, &self.graph, &mut self.rng)?;
        self.place_scene(scene)
    }

    fn episode_scene(&mut self) -> Result<Scene> {
        if std::mem::take(&mut self.scene_pending) {
            return Ok(self.scene.clone());
        }
        let strategy = self.config.scene_strategy;
        let scene = set_scene(&strategy, &self.graph, &mut self.rng)?;
        self.scene = scene.clone();
        self.tutor.observe_config(scene.extract_config());
        Ok(scene)
    }

    /// Runs one episode. A scheduled social episode with nothing left to propose runs as an
    /// autotelic one; an explicitly social request returns `None` and changes nothing.
    pub fn step(&mut self, mode: StepMode) -> Result<Option<MetricsRecord>> {
        let started = std::time::Instant::now();
        let requested = mode;
        let mode = match mode {
            StepMode::Scheduled => self.tutor.schedule(&mut self.rng),
            StepMode::Autotelic => EpisodeMode::Autotelic,
            StepMode::Social => EpisodeMode::Social,
        };
        let before = self.learner.discovered.len();
        let pair = match mode {
            EpisodeMode::Social => self.tutor.propose_hme_goals(&mut self.rng),
            EpisodeMode::Autotelic => None,
        };
        if requested == StepMode::Social && pair.is_none() {
            return Ok(None);
        }
        self.run(pair, before, started).map(Some)
    }

    /// The tutor's next (frontier, beyond) proposal, drawn from the trainer's stream.
    pub fn propose(&mut self) -> Option<FrontierPair> {
        self.tutor.propose_hme_goals(&mut self.rng)
    }

    /// Runs a social episode on a pair chosen by the tutor; it must be a current frontier pair
    /// of the tutor's model.
    pub fn run_pair(&mut self, pair: FrontierPair) -> Result<MetricsRecord> {
        let started = std::time::Instant::now();
        if !self.graph.frontier_pairs(&self.tutor.believed_discovered).contains(&pair) {
            return Err(Error::InvalidGoal(pair.beyond));
        }
        let before = self.learner.discovered.len();
        self.run(Some(pair), before, started)
    }

    fn run(&mut self, pair: Option<FrontierPair>, before: usize, started: std::time::Instant) -> Result<MetricsRecord> {
        self.episode += 1;
        let episode = self.episode;
        let mut scene = self.episode_scene()?;
        let competence = self.config.competence;
        let max_moves = self.config.max_moves;

        let (record_mode, goal, success, outcomes) = match pair {
            Some(pair) => {
                self.emit(EventKind::EpisodeStarted { episode, mode: RecordMode::Social, goal: pair.beyond });
                let social = self.tutor.run_social_episode(
                    pair,
                    &mut self.learner,
                    &mut scene,
                    &competence,
                    max_moves,
                    &mut self.rng,
                )?;
                if social.internalized {
                    self.emit(EventKind::PairInternalized { pair });
                }
                let success = social.success();
                (RecordMode::Social, pair.beyond, success, social.outcomes)
            }
            None => {
                let goal = self.learner.sample_goal(&self.graph, self.config.curriculum, &mut self.rng);
                self.emit(EventKind::EpisodeStarted { episode, mode: RecordMode::Autotelic, goal });
                let outcome =
                    self.learner.run_episode(&self.graph, &scene, &goal, &competence, max_moves, &mut self.rng)?;
                scene = self.graph.scene(&outcome.final_config())?.clone();
                self.tutor.observe(&outcome);
                let success = outcome.success;
                let mut outcomes = vec![outcome];
                self.autotelic_episodes += 1;
                if self.autotelic_episodes.is_multiple_of(self.config.rehearse_every as u64) {
                    if let Some((_, rehearsal)) =
                        self.learner.rehearse(&self.graph, &competence, max_moves, &mut self.rng)?
                    {
                        scene = self.graph.scene(&rehearsal.final_config())?.clone();
                        self.tutor.observe(&rehearsal);
                        outcomes.push(rehearsal);
                    }
                }
                (RecordMode::Autotelic, goal, success, outcomes)
            }
        };

        let moves = self.absorb(&outcomes)?;
        self.scene = scene;
        let discovered = self.learner.discovered.len();
        self.emit(EventKind::EpisodeFinished { episode, goal, success, moves });
        let record = MetricsRecord {
            episode,
            mode: record_mode,
            goal,
            success,
            moves,
            discovered,
            newly_discovered: discovered - before,
            wall_clock_ms: self.config.record_wall_clock.then(|| started.elapsed().as_secs_f64() * 1e3),
        };
        self.emit(EventKind::MetricUpdate(record.clone()));
        Ok(record)
    }

    /// Emits move and discovery events and lets the tutor describe every executed move.
    fn absorb(&mut self, outcomes: &[EpisodeOutcome]) -> Result<usize> {
        let mut moves = 0;
        let mut seen: BTreeSet<Configuration> = BTreeSet::new();
        for outcome in outcomes {
            moves += outcome.moves_used;
            for step in &outcome.steps {
                self.emit(EventKind::MoveExecuted {
                    from: step.from,
                    intended: step.intended,
                    success: step.success,
                    explored: step.explored,
                });
                if step.success && self.config.describe {
                    if let Some(sentence) = describe(&step.from, &step.intended, &self.inventory, &mut self.rng) {
                        let text = sentence.text.clone();
                        self.grounding.induce(&step.from, &text, &step.intended)?;
                    }
                }
            }
            for &c in &outcome.newly_discovered {
                if seen.insert(c) {
                    self.emit(EventKind::GoalDiscovered { configuration: c });
                }
            }
        }
        Ok(moves)
    }

    /// Follows a language instruction from the current scene using the induced groundings.
    pub fn instruct(&mut self, expr: &Expr, attempts: usize) -> Result<InstructionOutcome> {
        expr.check_leaves(&self.inventory)?;
        let inventory = self.inventory.clone();
        let graph = self.graph.clone();
        let competence = self.config.competence;
        let ctx = InstructionContext {
            graph: &graph,
            source: GroundingSource::Induced(&inventory, &self.grounding),
            competence: &competence,
            max_moves: self.config.max_moves,
        };
        let mut scene = self.scene.clone();
        let outcome = follow_instruction(expr, &mut self.learner, &mut scene, &ctx, attempts, &mut self.rng)?;
        self.scene = scene;
        self.scene_pending = true;
        for attempt in &outcome.attempts {
            let Some(o) = &attempt.outcome else { continue };
            self.episode += 1;
            let episode = self.episode;
            self.emit(EventKind::EpisodeStarted { episode, mode: RecordMode::Instructed, goal: o.goal });
            self.tutor.observe(o);
            let moves = self.absorb(std::slice::from_ref(o))?;
            self.emit(EventKind::EpisodeFinished { episode, goal: o.goal, success: o.success, moves });
            let record = MetricsRecord {
                episode,
                mode: RecordMode::Instructed,
                goal: o.goal,
                success: o.success,
                moves,
                discovered: self.learner.discovered.len(),
                newly_discovered: o.newly_discovered.len(),
                wall_clock_ms: None,
            };
            self.emit(EventKind::MetricUpdate(record));
        }
        Ok(outcome)
    }
}
