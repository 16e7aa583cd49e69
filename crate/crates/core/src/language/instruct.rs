use std::collections::BTreeSet;

use log::debug;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::expr::{ground_expression, Expr};
use super::grounding::GroundingSource;
use crate::competence::CompetenceModel;
use crate::error::{Error, Result};
use crate::graph::GoalGraph;
use crate::learner::{EpisodeOutcome, LearnerState};
use crate::scalar::Scalar;
use crate::semantics::{Configuration, Scene};

/// Picks the candidate the learner is most likely to reach: highest estimated competence, then
/// shortest plan, then smallest bit string.
pub fn select_goal<F: Scalar>(
    candidates: &BTreeSet<Configuration>,
    learner: &LearnerState,
    graph: &GoalGraph,
    current: &Configuration,
    competence: &CompetenceModel<F>,
) -> Result<Configuration> {
    let mut best: Option<(F, usize, Configuration)> = None;
    for c in candidates {
        let p = learner.estimated_competence(graph, current, c, competence)?;
        let len = learner.plan(graph, current, c)?.map_or(usize::MAX, |p| p.len());
        let better = match &best {
            None => true,
            Some((bp, blen, _)) => p > *bp || (p == *bp && len < *blen),
        };
        if better {
            best = Some((p, len, *c));
        }
    }
    let (p, _, goal) = best.ok_or(Error::NoCompatibleGoal)?;
    if p == F::zero() {
        debug!("desperate pick {goal}: no candidate is reachable through known goals");
    }
    Ok(goal)
}

/// Everything an instruction needs besides the learner and the scene.
#[derive(Clone, Copy, Debug)]
pub struct InstructionContext<'a, F: Scalar> {
    pub graph: &'a GoalGraph,
    pub source: GroundingSource<'a>,
    pub competence: &'a CompetenceModel<F>,
    pub max_moves: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub goal: Option<Configuration>,
    pub outcome: Option<EpisodeOutcome>,
    pub candidates: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstructionOutcome {
    pub success: bool,
    pub attempts: Vec<AttemptRecord>,
}

impl InstructionOutcome {
    pub fn reason(&self) -> Option<&'static str> {
        if self.success {
            None
        } else if self.attempts.iter().all(|a| a.goal.is_none()) {
            Some("no compatible goal")
        } else {
            Some("attempts exhausted")
        }
    }
}

/// Follows an instruction with up to `attempts` tries, without resetting the scene between
/// them. Each attempt grounds the expression from the current configuration and skips both the
/// current configuration and goals that already failed for this instruction.
pub fn follow_instruction<F: Scalar, R: Rng + ?Sized>(
    expr: &Expr,
    learner: &mut LearnerState,
    scene: &mut Scene,
    ctx: &InstructionContext<'_, F>,
    attempts: usize,
    rng: &mut R,
) -> Result<InstructionOutcome> {
    if attempts == 0 {
        return Err(Error::InvalidParameter("attempts must be at least 1".into()));
    }
    let mut failed: BTreeSet<Configuration> = BTreeSet::new();
    let mut records = Vec::with_capacity(attempts);
    for _ in 0..attempts {
        let current = scene.extract_config();
        let mut candidates = ground_expression(expr, &current, &learner.discovered, ctx.source)?;
        candidates.retain(|c| !failed.contains(c) && *c != current);
        if candidates.is_empty() {
            records.push(AttemptRecord { goal: None, outcome: None, candidates: 0 });
            continue;
        }
        let goal = select_goal(&candidates, learner, ctx.graph, &current, ctx.competence)?;
        let outcome = learner.run_episode(ctx.graph, scene, &goal, ctx.competence, ctx.max_moves, rng)?;
        *scene = ctx.graph.scene(&outcome.final_config())?.clone();
        let success = outcome.success;
        records.push(AttemptRecord { goal: Some(goal), outcome: Some(outcome), candidates: candidates.len() });
        if success {
            return Ok(InstructionOutcome { success: true, attempts: records });
        }
        failed.insert(goal);
    }
    Ok(InstructionOutcome { success: false, attempts: records })
}
