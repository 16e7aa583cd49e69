//! The autotelic learner.
//!
//! Skill acquisition is abstracted to a per-edge competence curve: the learner plans over the
//! goals it knows, attempts one block move at a time, and every attempt on an edge counts as
//! practice. Every configuration it visits is discovered and credited as an achieved goal.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use log::warn;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::competence::CompetenceModel;
use crate::error::{Error, Result};
use crate::graph::{FrontierPair, GoalGraph};
use crate::scalar::Scalar;
use crate::semantics::{Configuration, Scene, World};

/// How the learner picks its own goals.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Curriculum {
    /// Uniform over discovered goals.
    #[default]
    Uniform,
    /// Proportional to absolute learning progress plus a floor.
    LearningProgress,
    /// Uniform over every valid configuration, known or not.
    RandomConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LearnerParams {
    /// Probability of a uniformly random move instead of the planned one.
    pub epsilon: f64,
    /// Episodes per learning-progress window.
    pub lp_window: usize,
    pub lp_floor: f64,
    /// Consecutive rehearsal successes needed to master an internalized pair.
    pub mastery_streak: u32,
}

impl Default for LearnerParams {
    fn default() -> Self {
        LearnerParams { epsilon: 0.2, lp_window: 20, lp_floor: 0.05, mastery_streak: 3 }
    }
}

impl LearnerParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::InvalidParameter(format!("epsilon {} outside [0, 1]", self.epsilon)));
        }
        if self.lp_window == 0 {
            return Err(Error::InvalidParameter("lp_window must be positive".into()));
        }
        if self.lp_floor.is_nan() || self.lp_floor < 0.0 {
            return Err(Error::InvalidParameter("lp_floor must be non-negative".into()));
        }
        if self.mastery_streak == 0 {
            return Err(Error::InvalidParameter("mastery_streak must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeStats {
    pub attempts: u64,
    pub successes: u64,
}

/// Recent success history of one goal, at most two windows long.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GoalHistory {
    outcomes: VecDeque<bool>,
}

impl GoalHistory {
    pub fn record(&mut self, success: bool, window: usize) {
        self.outcomes.push_back(success);
        while self.outcomes.len() > 2 * window {
            self.outcomes.pop_front();
        }
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    /// |success rate of the latest window - success rate of the window before it|.
    /// Missing history counts as zero competence.
    pub fn learning_progress(&self, window: usize) -> f64 {
        let n = self.outcomes.len();
        let split = n.saturating_sub(window);
        let rate = |it: &mut dyn Iterator<Item = &bool>| {
            let v: Vec<bool> = it.copied().collect();
            if v.is_empty() {
                0.0
            } else {
                v.iter().filter(|&&b| b).count() as f64 / v.len() as f64
            }
        };
        let recent = rate(&mut self.outcomes.iter().skip(split));
        let older = rate(&mut self.outcomes.iter().take(split).skip(split.saturating_sub(window)));
        (recent - older).abs()
    }

    pub fn trailing_successes(&self) -> usize {
        self.outcomes.iter().rev().take_while(|&&b| b).count()
    }

    fn to_wire(&self) -> String {
        self.outcomes.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    fn from_wire(s: &str) -> Self {
        GoalHistory { outcomes: s.chars().map(|c| c == '1').collect() }
    }
}

/// A tutor-communicated goal pair kept for autonomous practice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InternalizedPair {
    pub pair: FrontierPair,
    pub mastered: bool,
    pub streak: u32,
}

/// One attempted move inside an episode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub from: Configuration,
    pub intended: Configuration,
    /// The move was random exploration rather than the planned step.
    pub explored: bool,
    pub success: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeOutcome {
    pub goal: Configuration,
    pub success: bool,
    /// Configuration after each move attempt, starting with the initial configuration.
    pub trajectory: Vec<Configuration>,
    pub moves_used: usize,
    pub newly_discovered: BTreeSet<Configuration>,
    pub steps: Vec<StepRecord>,
}

impl EpisodeOutcome {
    pub fn initial(&self) -> Configuration {
        self.trajectory[0]
    }

    pub fn final_config(&self) -> Configuration {
        *self.trajectory.last().expect("trajectory is never empty")
    }
}

/// Discovered goals, practice statistics and internalized pairs of one learner.
#[derive(Clone, Debug, PartialEq)]
pub struct LearnerState {
    pub world: World,
    pub discovered: BTreeSet<Configuration>,
    pub edge_stats: BTreeMap<(Configuration, Configuration), EdgeStats>,
    pub goal_stats: BTreeMap<Configuration, GoalHistory>,
    pub internalized: Vec<InternalizedPair>,
    pub rng_seed: u64,
    pub params: LearnerParams,
}

impl LearnerState {
    pub fn new(world: World, params: LearnerParams, rng_seed: u64) -> Self {
        LearnerState {
            world,
            discovered: BTreeSet::new(),
            edge_stats: BTreeMap::new(),
            goal_stats: BTreeMap::new(),
            internalized: Vec::new(),
            rng_seed,
            params,
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.params.epsilon
    }

    pub fn practice(&self, from: &Configuration, to: &Configuration) -> u64 {
        self.edge_stats.get(&(*from, *to)).map_or(0, |s| s.attempts)
    }

    pub fn learning_progress(&self, goal: &Configuration) -> f64 {
        self.goal_stats
            .get(goal)
            .map_or(0.0, |h| h.learning_progress(self.params.lp_window))
    }

    /// Mastery criterion shared by rehearsal and internalization: the goal's latest
    /// `mastery_streak` outcomes are all successes.
    pub fn is_mastered(&self, goal: &Configuration) -> bool {
        self.goal_stats
            .get(goal)
            .is_some_and(|h| h.trailing_successes() >= self.params.mastery_streak as usize)
    }

    /// Marks a configuration as discovered; returns whether it was new.
    pub fn discover(&mut self, c: Configuration) -> bool {
        self.discovered.insert(c)
    }

    pub fn sample_goal<R: Rng + ?Sized>(&self, graph: &GoalGraph, strategy: Curriculum, rng: &mut R) -> Configuration {
        let uniform_over = |set: &BTreeSet<Configuration>, rng: &mut R| {
            *set.iter().nth(rng.gen_range(0..set.len())).expect("index in range")
        };
        match strategy {
            _ if self.discovered.is_empty() && strategy != Curriculum::RandomConfig => {
                warn!("no discovered goal to sample from; falling back to a random configuration");
                self.sample_goal(graph, Curriculum::RandomConfig, rng)
            }
            Curriculum::Uniform => uniform_over(&self.discovered, rng),
            Curriculum::RandomConfig => graph.node(rng.gen_range(0..graph.len())),
            Curriculum::LearningProgress => {
                let goals: Vec<Configuration> = self.discovered.iter().copied().collect();
                let weights: Vec<f64> = goals
                    .iter()
                    .map(|g| self.learning_progress(g) + self.params.lp_floor)
                    .collect();
                match WeightedIndex::new(&weights) {
                    Ok(dist) => goals[dist.sample(rng)],
                    Err(_) => uniform_over(&self.discovered, rng),
                }
            }
        }
    }

    /// Shortest plan (graph node indices) from `from` to `to`, passing only through discovered
    /// goals and the immediate neighbors of `from`.
    pub fn plan(&self, graph: &GoalGraph, from: &Configuration, to: &Configuration) -> Result<Option<Vec<usize>>> {
        let (i, j) = (graph.node_index(from)?, graph.node_index(to)?);
        let mut allowed = vec![false; graph.len()];
        allowed[i] = true;
        for &k in graph.neighbor_indices(i) {
            allowed[k] = true;
        }
        for c in &self.discovered {
            if let Ok(k) = graph.node_index(c) {
                allowed[k] = true;
            }
        }
        Ok(graph.shortest_path_within(i, j, |k| allowed[k]))
    }

    /// Probability of executing the current plan to `goal` without a failed move:
    /// the product of per-edge success probabilities, or zero without a plan.
    pub fn estimated_competence<F: Scalar>(
        &self,
        graph: &GoalGraph,
        current: &Configuration,
        goal: &Configuration,
        competence: &CompetenceModel<F>,
    ) -> Result<F> {
        let Some(path) = self.plan(graph, current, goal)? else {
            return Ok(F::zero());
        };
        Ok(path.windows(2).fold(F::one(), |acc, w| {
            let (a, b) = (graph.node(w[0]), graph.node(w[1]));
            acc * competence.probability(self.practice(&a, &b))
        }))
    }

    /// Pursues `goal` from `initial` for at most `max_moves` move attempts.
    pub fn run_episode<F: Scalar, R: Rng + ?Sized>(
        &mut self,
        graph: &GoalGraph,
        initial: &Scene,
        goal: &Configuration,
        competence: &CompetenceModel<F>,
        max_moves: usize,
        rng: &mut R,
    ) -> Result<EpisodeOutcome> {
        if !graph.contains(goal) {
            return Err(Error::InvalidGoal(*goal));
        }
        if max_moves == 0 {
            return Err(Error::InvalidParameter("max_moves must be at least 1".into()));
        }
        let start = initial.extract_config();
        let mut current = start;
        let mut newly = BTreeSet::new();
        if self.discover(current) {
            newly.insert(current);
        }
        let mut trajectory = vec![current];
        let mut steps = Vec::new();

        while current != *goal && steps.len() < max_moves {
            let ci = graph.node_index(&current)?;
            let explore = rng.gen::<f64>() < self.params.epsilon;
            let planned = if explore {
                None
            } else {
                self.plan(graph, &current, goal)?.map(|p| graph.node(p[1]))
            };
            let (intended, explored) = match planned {
                Some(next) => (next, false),
                None => {
                    let options = graph.move_targets(ci);
                    (graph.node(options[rng.gen_range(0..options.len())]), true)
                }
            };
            let p = competence.probability(self.practice(&current, &intended)).as_f64();
            let success = rng.gen::<f64>() < p;
            let stats = self.edge_stats.entry((current, intended)).or_default();
            stats.attempts += 1;
            stats.successes += success as u64;
            steps.push(StepRecord { from: current, intended, explored, success });
            if success {
                current = intended;
                if self.discover(current) {
                    newly.insert(current);
                }
            }
            trajectory.push(current);
        }

        let success = current == *goal;
        let window = self.params.lp_window;
        self.goal_stats.entry(*goal).or_default().record(success, window);
        let reached: BTreeSet<Configuration> = trajectory[1..]
            .iter()
            .copied()
            .filter(|c| c != goal && *c != start)
            .collect();
        for c in reached {
            self.goal_stats.entry(c).or_default().record(true, window);
        }

        Ok(EpisodeOutcome {
            goal: *goal,
            success,
            moves_used: steps.len(),
            trajectory,
            newly_discovered: newly,
            steps,
        })
    }

    /// Memorizes a tutor-communicated pair; both goals become known. Returns `false` for a pair
    /// that is already stored.
    pub fn internalize(&mut self, pair: FrontierPair) -> bool {
        self.discover(pair.frontier);
        self.discover(pair.beyond);
        if self.internalized.iter().any(|p| p.pair == pair) {
            return false;
        }
        let mastered = self.is_mastered(&pair.beyond);
        self.internalized.push(InternalizedPair { pair, mastered, streak: 0 });
        true
    }

    /// Practices the oldest unmastered internalized pair: an episode toward its beyond goal from
    /// the scene realizing its frontier goal. `None` when every pair is mastered.
    pub fn rehearse<F: Scalar, R: Rng + ?Sized>(
        &mut self,
        graph: &GoalGraph,
        competence: &CompetenceModel<F>,
        max_moves: usize,
        rng: &mut R,
    ) -> Result<Option<(FrontierPair, EpisodeOutcome)>> {
        let Some(idx) = self.internalized.iter().position(|p| !p.mastered) else {
            return Ok(None);
        };
        let pair = self.internalized[idx].pair;
        let scene = graph.scene(&pair.frontier)?.clone();
        let outcome = self.run_episode(graph, &scene, &pair.beyond, competence, max_moves, rng)?;
        let threshold = self.params.mastery_streak;
        let entry = &mut self.internalized[idx];
        if outcome.success {
            entry.streak += 1;
            entry.mastered = entry.streak >= threshold;
        } else {
            entry.streak = 0;
        }
        Ok(Some((pair, outcome)))
    }

    pub fn snapshot(&self) -> LearnerSnapshot {
        LearnerSnapshot::from(self)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeStatsEntry {
    pub from: Configuration,
    pub to: Configuration,
    pub attempts: u64,
    pub successes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoalStatsEntry {
    pub goal: Configuration,
    /// Oldest first, `1` for success.
    pub history: String,
}

/// JSON form of a learner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerSnapshot {
    pub n_blocks: World,
    pub discovered: Vec<Configuration>,
    pub edge_stats: Vec<EdgeStatsEntry>,
    pub goal_stats: Vec<GoalStatsEntry>,
    pub internalized: Vec<InternalizedPair>,
    pub rng_seed: u64,
    pub params: LearnerParams,
}

impl From<&LearnerState> for LearnerSnapshot {
    fn from(s: &LearnerState) -> Self {
        LearnerSnapshot {
            n_blocks: s.world,
            discovered: s.discovered.iter().copied().collect(),
            edge_stats: s
                .edge_stats
                .iter()
                .map(|((from, to), e)| EdgeStatsEntry { from: *from, to: *to, attempts: e.attempts, successes: e.successes })
                .collect(),
            goal_stats: s
                .goal_stats
                .iter()
                .map(|(g, h)| GoalStatsEntry { goal: *g, history: h.to_wire() })
                .collect(),
            internalized: s.internalized.clone(),
            rng_seed: s.rng_seed,
            params: s.params,
        }
    }
}

impl TryFrom<LearnerSnapshot> for LearnerState {
    type Error = Error;

    fn try_from(s: LearnerSnapshot) -> Result<Self> {
        let world = s.n_blocks;
        let check = |c: &Configuration| {
            if c.world() == world {
                Ok(*c)
            } else {
                Err(Error::Dimension { expected: world.predicate_count(), actual: c.len() })
            }
        };
        s.params.validate()?;
        Ok(LearnerState {
            world,
            discovered: s.discovered.iter().map(check).collect::<Result<_>>()?,
            edge_stats: s
                .edge_stats
                .iter()
                .map(|e| Ok(((check(&e.from)?, check(&e.to)?), EdgeStats { attempts: e.attempts, successes: e.successes })))
                .collect::<Result<_>>()?,
            goal_stats: s
                .goal_stats
                .iter()
                .map(|g| Ok((check(&g.goal)?, GoalHistory::from_wire(&g.history))))
                .collect::<Result<_>>()?,
            internalized: s.internalized,
            rng_seed: s.rng_seed,
            params: s.params,
        })
    }
}

impl Serialize for LearnerState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.snapshot().serialize(s)
    }
}

impl<'de> Deserialize<'de> for LearnerState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        LearnerSnapshot::deserialize(d)?.try_into().map_err(serde::de::Error::custom)
    }
}
