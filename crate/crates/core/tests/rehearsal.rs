use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use taa_core::competence::CompetenceModel;
use taa_core::graph::{FrontierPair, GoalGraph};
use taa_core::learner::{LearnerParams, LearnerState};
use taa_core::semantics::World;

/// Rehearsals until mastery for a one-move pair at success rate p with streak M:
/// sum of p^-k for k = 1..M, i.e. 14 at p = 0.5, M = 3.
#[test]
fn rehearsals_to_mastery_match_the_run_length_mean() {
    let world = World::new(3).unwrap();
    let graph = GoalGraph::build_full(3).unwrap();
    let frontier = graph.node(0);
    let beyond = graph.node(graph.move_targets(0)[0]);
    let competence = CompetenceModel::<f64>::constant(0.5);
    let params = LearnerParams { epsilon: 0.0, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let runs = 4000;
    let mut total = 0usize;
    for seed in 0..runs {
        let mut learner = LearnerState::new(world, params, seed);
        learner.discover(frontier);
        learner.internalize(FrontierPair { frontier, beyond });
        let mut count = 0;
        while learner.rehearse(&graph, &competence, 1, &mut rng).unwrap().is_some() {
            count += 1;
        }
        total += count;
        assert!(learner.internalized.iter().all(|p| p.mastered));
    }
    let mean = total as f64 / runs as f64;
    assert!((mean - 14.0).abs() < 0.8, "mean rehearsals {mean}");
}
