use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use taa_core::graph::GoalGraph;
use taa_core::language::*;
use taa_core::learner::{LearnerParams, LearnerState};
use taa_core::semantics::{Configuration, World};
use taa_core::tutor::describe;

fn graph() -> GoalGraph {
    GoalGraph::build_full(3).unwrap()
}

fn holds(expr: &Expr, c: &Configuration, current: &Configuration, inv: &Inventory) -> bool {
    match expr {
        Expr::Leaf(text) => {
            let t = inv.get(text).unwrap().transformation;
            c != current && c.get(t.predicate) == t.target
        }
        Expr::And(a, b) => holds(a, c, current, inv) && holds(b, c, current, inv),
        Expr::Or(a, b) => holds(a, c, current, inv) || holds(b, c, current, inv),
        Expr::Not(a) => !holds(a, c, current, inv),
    }
}

fn random_subset(g: &GoalGraph, rng: &mut ChaCha8Rng) -> BTreeSet<Configuration> {
    g.nodes().iter().copied().filter(|_| rng.gen_bool(0.6)).collect()
}

#[test]
fn inventory_sizes() {
    assert_eq!(build_inventory(3).unwrap().len(), 102);
    let inv = build_inventory(3).unwrap();
    let texts: BTreeSet<&str> = inv.sentences().iter().map(|s| s.text.as_str()).collect();
    assert_eq!(texts.len(), inv.len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expressions_ground_pointwise(seed in any::<u64>(), depth in 0usize..4) {
        let g = graph();
        let inv = build_inventory(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let discovered = random_subset(&g, &mut rng);
        let current = g.node(rng.gen_range(0..g.len()));
        let expr = sample_expression(&inv, depth, &mut rng);
        let got = ground_expression(&expr, &current, &discovered, GroundingSource::Oracle(&inv)).unwrap();
        let want: BTreeSet<Configuration> =
            discovered.iter().filter(|c| holds(&expr, c, &current, &inv)).copied().collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn grounded_sets_stay_within_discovered(seed in any::<u64>()) {
        let g = graph();
        let inv = build_inventory(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let discovered = random_subset(&g, &mut rng);
        let current = g.node(rng.gen_range(0..g.len()));
        let expr = sample_expression(&inv, 3, &mut rng);
        let got = ground_expression(&expr, &current, &discovered, GroundingSource::Oracle(&inv)).unwrap();
        prop_assert!(got.is_subset(&discovered));
    }

    #[test]
    fn descriptions_name_a_real_change(seed in any::<u64>()) {
        let g = graph();
        let inv = build_inventory(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let i = rng.gen_range(0..g.len());
        let before = g.node(i);
        let targets = g.move_targets(i);
        let after = g.node(targets[rng.gen_range(0..targets.len())]);
        if let Some(s) = describe(&before, &after, &inv, &mut rng) {
            let t = s.transformation;
            prop_assert!(before.get(t.predicate) != t.target);
            prop_assert_eq!(after.get(t.predicate), t.target);
        }
    }

    #[test]
    fn induction_never_drops_the_true_meaning(seed in any::<u64>(), steps in 1usize..400) {
        let g = graph();
        let inv = build_inventory(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut table = GroundingTable::new();
        for _ in 0..steps {
            let i = rng.gen_range(0..g.len());
            let targets = g.move_targets(i);
            let (before, after) = (g.node(i), g.node(targets[rng.gen_range(0..targets.len())]));
            if let Some(s) = describe(&before, &after, &inv, &mut rng) {
                table.induce(&before, &s.text, &after).unwrap();
            }
        }
        for s in inv.sentences() {
            if let Some(c) = table.candidates(&s.text) {
                prop_assert!(c.contains(&s.transformation), "{}", s.text);
            }
        }
    }

    #[test]
    fn frontier_pairs_cross_the_boundary(seed in any::<u64>()) {
        let g = graph();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let discovered = random_subset(&g, &mut rng);
        for p in g.frontier_pairs(&discovered) {
            prop_assert!(discovered.contains(&p.frontier));
            prop_assert!(!discovered.contains(&p.beyond));
            prop_assert!(g.has_edge(&p.frontier, &p.beyond));
        }
    }

    #[test]
    fn internalizing_a_pair_discovers_both_ends(seed in any::<u64>()) {
        let g = graph();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut learner = LearnerState::new(World::new(3).unwrap(), LearnerParams::default(), seed);
        learner.discovered = random_subset(&g, &mut rng);
        learner.discover(g.node(0));
        let pairs = g.frontier_pairs(&learner.discovered);
        prop_assume!(!pairs.is_empty());
        let pair = pairs[rng.gen_range(0..pairs.len())];
        let before = learner.discovered.len();
        learner.internalize(pair);
        prop_assert!(learner.discovered.contains(&pair.beyond));
        prop_assert_eq!(learner.discovered.len(), before + 1);
    }
}

#[test]
fn unknown_and_ungrounded_sentences() {
    let inv = build_inventory(3).unwrap();
    let g = graph();
    let universe: BTreeSet<Configuration> = g.nodes().iter().copied().collect();
    let current = g.node(0);
    let bogus = Expr::leaf("fly red to the moon");
    assert!(matches!(
        ground_expression(&bogus, &current, &universe, GroundingSource::Oracle(&inv)),
        Err(taa_core::Error::UnknownSentence(_))
    ));
    let table = GroundingTable::new();
    let real = Expr::leaf(inv.sentences()[0].text.clone());
    assert!(matches!(
        ground_expression(&real, &current, &universe, GroundingSource::Induced(&inv, &table)),
        Err(taa_core::Error::NotYetGrounded(_))
    ));
}
