//! The social partner: models the learner's discoveries, schedules social episodes, proposes
//! frontier goals, sets scenes and describes transitions.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::competence::CompetenceModel;
use crate::error::{Error, Result};
use crate::graph::{FrontierPair, GoalGraph};
use crate::language::{Inventory, Sentence};
use crate::learner::{EpisodeOutcome, LearnerState};
use crate::scalar::Scalar;
use crate::semantics::{enumerate_flat_scenes, BlockId, Configuration, Scene, Structure, World};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpisodeMode {
    Social,
    Autotelic,
}

/// How the tutor arranges the blocks before an episode.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SceneIntervention {
    /// Only single blocks, grouped uniformly at random.
    #[default]
    RandomScatter,
    /// A random stack of `k` blocks; the others scattered.
    PreStacked { k: usize },
    /// A scene within `distance` moves of `goal`.
    NearGoal { goal: Configuration, distance: usize },
}

impl SceneIntervention {
    pub fn validate(&self, world: World) -> Result<()> {
        match self {
            SceneIntervention::PreStacked { k } if *k < 2 || *k > world.n_blocks() => Err(
                Error::InfeasibleIntervention(format!("cannot pre-stack {k} of {} blocks", world.n_blocks())),
            ),
            SceneIntervention::NearGoal { distance: 0, .. } => {
                Err(Error::InfeasibleIntervention("near-goal distance must be at least 1".into()))
            }
            SceneIntervention::NearGoal { goal, .. } if goal.world() != world => {
                Err(Error::Dimension { expected: world.predicate_count(), actual: goal.len() })
            }
            _ => Ok(()),
        }
    }
}

/// Builds the initial scene for an intervention.
pub fn set_scene<R: Rng + ?Sized>(intervention: &SceneIntervention, graph: &GoalGraph, rng: &mut R) -> Result<Scene> {
    let world = graph.world();
    intervention.validate(world)?;
    match *intervention {
        SceneIntervention::RandomScatter => {
            let flat = enumerate_flat_scenes(world);
            Ok(flat[rng.gen_range(0..flat.len())].clone())
        }
        SceneIntervention::PreStacked { k } => {
            let mut blocks: Vec<BlockId> = world.blocks().collect();
            blocks.shuffle(rng);
            let (stack, rest) = blocks.split_at(k);
            let mut clusters = vec![vec![Structure::Stack(stack.to_vec())]];
            clusters.extend(rest.iter().map(|&b| vec![Structure::Single(b)]));
            Scene::from_clusters(world, clusters)
        }
        SceneIntervention::NearGoal { goal, distance } => {
            let gi = graph
                .node_index(&goal)
                .map_err(|_| Error::InfeasibleIntervention(format!("{goal} is not a reachable configuration")))?;
            let near: Vec<usize> = graph
                .distances_from(gi, |_| true)
                .iter()
                .enumerate()
                .filter_map(|(i, d)| d.filter(|&d| d <= distance).map(|_| i))
                .collect();
            if near.is_empty() {
                return Err(Error::InfeasibleIntervention(format!("no configuration within {distance} of {goal}")));
            }
            let pick = graph.node(near[rng.gen_range(0..near.len())]);
            Ok(graph.scene(&pick)?.clone())
        }
    }
}

/// Names one changed predicate of a transition with a sentence from the inventory.
pub fn describe<'a, R: Rng + ?Sized>(
    before: &Configuration,
    after: &Configuration,
    inventory: &'a Inventory,
    rng: &mut R,
) -> Option<&'a Sentence> {
    let changed = before.diff(after);
    let &index = changed.choose(rng)?;
    let predicate = before.world().predicate(index)?;
    let candidates = inventory.sentences_for(predicate, after.get_index(index));
    candidates.choose(rng).copied()
}

/// Result of one tutor-led interaction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SocialOutcome {
    pub pair: FrontierPair,
    /// Frontier episode, then the beyond episode when the frontier was reached.
    pub outcomes: Vec<EpisodeOutcome>,
    pub internalized: bool,
}

impl SocialOutcome {
    pub fn success(&self) -> bool {
        self.outcomes.len() == 2 && self.outcomes[1].success
    }
}

/// The tutor's copy of the learner's discovered goals plus its own full graph.
#[derive(Clone, Debug)]
pub struct TutorModel {
    pub full_graph: Arc<GoalGraph>,
    pub believed_discovered: BTreeSet<Configuration>,
    pub social_rate: f64,
}

impl TutorModel {
    pub fn new(full_graph: Arc<GoalGraph>, social_rate: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&social_rate) {
            return Err(Error::InvalidParameter(format!("social rate {social_rate} outside [0, 1]")));
        }
        Ok(TutorModel { full_graph, believed_discovered: BTreeSet::new(), social_rate })
    }

    pub fn observe(&mut self, outcome: &EpisodeOutcome) {
        self.believed_discovered.extend(outcome.newly_discovered.iter().copied());
        self.believed_discovered.extend(outcome.trajectory.iter().copied());
    }

    pub fn observe_config(&mut self, c: Configuration) {
        self.believed_discovered.insert(c);
    }

    pub fn schedule<R: Rng + ?Sized>(&self, rng: &mut R) -> EpisodeMode {
        if rng.gen::<f64>() < self.social_rate {
            EpisodeMode::Social
        } else {
            EpisodeMode::Autotelic
        }
    }

    /// A uniformly chosen (frontier, beyond) pair, or `None` once nothing is left beyond.
    pub fn propose_hme_goals<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<FrontierPair> {
        let pairs = self.full_graph.frontier_pairs(&self.believed_discovered);
        pairs.choose(rng).copied()
    }

    /// Runs a social interaction from `scene`: the learner pursues the frontier goal; on success
    /// the pair is internalized and the learner pursues the beyond goal from where it stands.
    /// `scene` is left at the final configuration.
    pub fn run_social_episode<F: Scalar, R: Rng + ?Sized>(
        &mut self,
        pair: FrontierPair,
        learner: &mut LearnerState,
        scene: &mut Scene,
        competence: &CompetenceModel<F>,
        max_moves: usize,
        rng: &mut R,
    ) -> Result<SocialOutcome> {
        let graph = self.full_graph.clone();
        let first = learner.run_episode(&graph, scene, &pair.frontier, competence, max_moves, rng)?;
        self.observe(&first);
        *scene = graph.scene(&first.final_config())?.clone();
        let mut outcomes = vec![first];
        let mut internalized = false;
        if outcomes[0].success {
            learner.internalize(pair);
            internalized = true;
            self.observe_config(pair.frontier);
            self.observe_config(pair.beyond);
            let second = learner.run_episode(&graph, scene, &pair.beyond, competence, max_moves, rng)?;
            self.observe(&second);
            *scene = graph.scene(&second.final_config())?.clone();
            outcomes.push(second);
        }
        Ok(SocialOutcome { pair, outcomes, internalized })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::LearnerParams;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn graph() -> Arc<GoalGraph> {
        GoalGraph::shared(World::new(3).unwrap())
    }

    #[test]
    fn schedule_extremes_and_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let never = TutorModel::new(graph(), 0.0).unwrap();
        let always = TutorModel::new(graph(), 1.0).unwrap();
        assert!((0..1000).all(|_| never.schedule(&mut rng) == EpisodeMode::Autotelic));
        assert!((0..1000).all(|_| always.schedule(&mut rng) == EpisodeMode::Social));
        let half = TutorModel::new(graph(), 0.5).unwrap();
        let social = (0..10_000).filter(|_| half.schedule(&mut rng) == EpisodeMode::Social).count();
        assert!((social as f64 / 1e4 - 0.5).abs() <= 0.02);
        assert!(TutorModel::new(graph(), 1.5).is_err());
    }

    #[test]
    fn proposals() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut t = TutorModel::new(graph(), 0.5).unwrap();
        assert!(t.propose_hme_goals(&mut rng).is_none());
        let z = Configuration::zeros(t.full_graph.world());
        t.observe_config(z);
        let p = t.propose_hme_goals(&mut rng).unwrap();
        assert_eq!(p.frontier, z);
        t.believed_discovered = t.full_graph.nodes().iter().copied().collect();
        assert!(t.propose_hme_goals(&mut rng).is_none());
    }

    #[test]
    fn observe_is_a_union() {
        let mut t = TutorModel::new(graph(), 0.0).unwrap();
        let c = Configuration::parse(t.full_graph.world(), "100000000").unwrap();
        let outcome = EpisodeOutcome {
            goal: c,
            success: true,
            trajectory: vec![c],
            moves_used: 0,
            newly_discovered: BTreeSet::from([c]),
            steps: vec![],
        };
        t.observe(&outcome);
        let once = t.believed_discovered.clone();
        t.observe(&outcome);
        assert_eq!(t.believed_discovered, once);
        assert!(once.contains(&c));
    }

    #[test]
    fn scene_interventions() {
        let g = graph();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let s = set_scene(&SceneIntervention::RandomScatter, &g, &mut rng).unwrap();
            let c = s.extract_config();
            assert!((3..9).all(|i| !c.get_index(i)));
            let s = set_scene(&SceneIntervention::PreStacked { k: 2 }, &g, &mut rng).unwrap();
            assert_eq!(s.extract_config().ones(), 2, "one close bit and one direct above bit");
            assert_eq!(s.max_stack_height(), 2);
        }
        let goal = Configuration::parse(g.world(), "111110100").unwrap();
        for _ in 0..20 {
            let s = set_scene(&SceneIntervention::NearGoal { goal, distance: 1 }, &g, &mut rng).unwrap();
            let c = s.extract_config();
            assert!(c == goal || g.has_edge(&c, &goal));
        }
        assert!(set_scene(&SceneIntervention::NearGoal { goal, distance: 0 }, &g, &mut rng).is_err());
        let bogus = Configuration::parse(g.world(), "000100000").unwrap();
        assert!(matches!(
            set_scene(&SceneIntervention::NearGoal { goal: bogus, distance: 2 }, &g, &mut rng),
            Err(Error::InfeasibleIntervention(_))
        ));
        assert!(set_scene(&SceneIntervention::PreStacked { k: 4 }, &g, &mut rng).is_err());
    }

    #[test]
    fn social_episode_branches() {
        let g = graph();
        let z = Configuration::zeros(g.world());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let params = LearnerParams { epsilon: 0.0, ..Default::default() };

        let mut learner = LearnerState::new(g.world(), params, 0);
        learner.discover(z);
        let mut tutor = TutorModel::new(g.clone(), 1.0).unwrap();
        tutor.observe_config(z);
        let pair = tutor.propose_hme_goals(&mut rng).unwrap();
        let mut scene = Scene::scattered(g.world());
        let out = tutor
            .run_social_episode(pair, &mut learner, &mut scene, &CompetenceModel::<f64>::perfect(), 5, &mut rng)
            .unwrap();
        assert!(out.internalized && out.success());
        assert!(learner.discovered.contains(&pair.beyond));
        assert_eq!(tutor.believed_discovered, learner.discovered);

        // frontier unreachable under zero competence: nothing internalized
        let mut learner = LearnerState::new(g.world(), params, 0);
        learner.discover(z);
        let far = Configuration::parse(g.world(), "111110100").unwrap();
        learner.discover(far);
        let mut tutor = TutorModel::new(g.clone(), 1.0).unwrap();
        tutor.believed_discovered = learner.discovered.clone();
        let pair = tutor
            .full_graph
            .frontier_pairs(&tutor.believed_discovered)
            .into_iter()
            .find(|p| p.frontier == far)
            .unwrap();
        let mut scene = Scene::scattered(g.world());
        let out = tutor
            .run_social_episode(pair, &mut learner, &mut scene, &CompetenceModel::<f64>::null(), 5, &mut rng)
            .unwrap();
        assert!(!out.internalized);
        assert_eq!(out.outcomes.len(), 1);
        assert!(learner.internalized.is_empty());
        assert_eq!(learner.discovered, BTreeSet::from([z, far]));
    }
}
