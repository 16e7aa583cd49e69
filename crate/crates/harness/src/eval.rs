//! The transition, expression and sequence evaluation setups.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use taa_core::graph::GoalGraph;
use taa_core::language::{
    build_inventory, follow_instruction, sample_expression, Expr, GroundingSource, InstructionContext, Inventory,
};
use taa_core::learner::LearnerState;
use taa_core::tutor::{set_scene, SceneIntervention};
use taa_core::{Competence, Result};

pub const TRIALS_PER_SENTENCE: usize = 5;
pub const EXPRESSIONS: usize = 500;
pub const EXPRESSION_DEPTH: usize = 2;
pub const SEQUENCE_AGENTS: usize = 10;
pub const SEQUENCE_LENGTH: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Setup {
    Transition,
    Expression,
    Sequence,
}

impl Setup {
    pub fn name(self) -> &'static str {
        match self {
            Setup::Transition => "transition",
            Setup::Expression => "expression",
            Setup::Sequence => "sequence",
        }
    }
}

impl std::str::FromStr for Setup {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "transition" => Ok(Setup::Transition),
            "expression" => Ok(Setup::Expression),
            "sequence" => Ok(Setup::Sequence),
            other => Err(format!("unknown setup `{other}`")),
        }
    }
}

/// One row of `eval.csv`. For the sequence setup `rate` is the mean number of consecutive
/// successes rather than a proportion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub setup: Setup,
    pub attempts: usize,
    pub rate: f64,
    pub stderr: f64,
    pub trials: usize,
}

impl EvalResult {
    pub const CSV_HEADER: &'static str = "setup,attempts,rate,stderr";

    pub fn csv_row(&self) -> String {
        format!("{},{},{:.6},{:.6}", self.setup.name(), self.attempts, self.rate, self.stderr)
    }

    fn proportion(setup: Setup, attempts: usize, outcomes: &[bool]) -> Self {
        let n = outcomes.len();
        let rate = outcomes.iter().filter(|&&s| s).count() as f64 / n as f64;
        EvalResult { setup, attempts, rate, stderr: (rate * (1.0 - rate) / n as f64).sqrt(), trials: n }
    }
}

/// A frozen learner plus what it needs to act. Evaluations never mutate the agent: every trial
/// works on a clone. Leaves are grounded by the oracle.
#[derive(Clone)]
pub struct Agent<'a> {
    pub learner: &'a LearnerState,
    pub graph: &'a GoalGraph,
    pub inventory: &'a Inventory,
    pub competence: Competence,
    pub max_moves: usize,
}

impl Agent<'_> {
    fn context(&self) -> InstructionContext<'_, f64> {
        InstructionContext {
            graph: self.graph,
            source: GroundingSource::Oracle(self.inventory),
            competence: &self.competence,
            max_moves: self.max_moves,
        }
    }

    /// Independent random stream for trial `k`; the same `k` sees the same draws whatever the
    /// attempt budget, so results for one attempt are a prefix of those for more.
    fn stream(seed: u64, k: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k);
        rng
    }

    fn trial(&self, expr: &Expr, attempts: usize, rng: &mut ChaCha8Rng) -> Result<bool> {
        let mut learner = self.learner.clone();
        let mut scene = set_scene(&SceneIntervention::RandomScatter, self.graph, rng)?;
        let ctx = self.context();
        Ok(follow_instruction(expr, &mut learner, &mut scene, &ctx, attempts, rng)?.success)
    }
}

/// Every inventory sentence, [`TRIALS_PER_SENTENCE`] times, from a fresh scattered scene.
pub fn eval_transition(agent: &Agent<'_>, attempts: usize, seed: u64) -> Result<EvalResult> {
    let sentences = agent.inventory.sentences();
    let outcomes = (0..sentences.len() * TRIALS_PER_SENTENCE)
        .into_par_iter()
        .map(|k| {
            let expr = Expr::leaf(sentences[k / TRIALS_PER_SENTENCE].text.clone());
            agent.trial(&expr, attempts, &mut Agent::stream(seed, k as u64))
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(EvalResult::proportion(Setup::Transition, attempts, &outcomes))
}

/// `n` sampled expressions of depth at most [`EXPRESSION_DEPTH`].
pub fn eval_expression(agent: &Agent<'_>, n: usize, attempts: usize, seed: u64) -> Result<EvalResult> {
    let outcomes = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut rng = Agent::stream(seed, k as u64);
            let expr = sample_expression(agent.inventory, EXPRESSION_DEPTH, &mut rng);
            agent.trial(&expr, attempts, &mut rng)
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(EvalResult::proportion(Setup::Expression, attempts, &outcomes))
}

/// Consecutive successes of one agent on a random sentence sequence without scene resets.
pub fn run_sequence(agent: &Agent<'_>, len: usize, attempts: usize, rng: &mut ChaCha8Rng) -> Result<usize> {
    let mut learner = agent.learner.clone();
    let mut scene = set_scene(&SceneIntervention::RandomScatter, agent.graph, rng)?;
    let ctx = agent.context();
    let sentences = agent.inventory.sentences();
    for done in 0..len {
        let expr = Expr::leaf(sentences[rng.gen_range(0..sentences.len())].text.clone());
        if !follow_instruction(&expr, &mut learner, &mut scene, &ctx, attempts, rng)?.success {
            return Ok(done);
        }
    }
    Ok(len)
}

/// Mean consecutive successes over `n_agents` sequences; agent `i` is `agents[i % len]`.
pub fn eval_sequence(
    agents: &[Agent<'_>],
    n_agents: usize,
    len: usize,
    attempts: usize,
    seed: u64,
) -> Result<EvalResult> {
    let counts = (0..n_agents)
        .into_par_iter()
        .map(|i| {
            let agent = &agents[i % agents.len()];
            run_sequence(agent, len, attempts, &mut Agent::stream(seed, i as u64)).map(|c| c as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(EvalResult {
        setup: Setup::Sequence,
        attempts,
        rate: crate::stats::mean(&counts),
        stderr: crate::stats::stderr(&counts),
        trials: n_agents,
    })
}

/// Expected consecutive successes when every instruction independently succeeds with
/// probability `q` and the sequence stops after `len`.
pub fn truncated_geometric_mean(q: f64, len: usize) -> f64 {
    (1..=len as i32).map(|k| q.powi(k)).sum()
}

/// Loads the inventory for an agent's world.
pub fn inventory_for(learner: &LearnerState) -> Result<Inventory> {
    build_inventory(learner.world.n_blocks())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_equals_the_streak_distribution_sum() {
        for q in [0.0f64, 0.3, 0.9, 0.94, 1.0] {
            let l = 20;
            let by_pmf: f64 = (1..=l)
                .map(|k| {
                    let p = if k < l { q.powi(k as i32) * (1.0 - q) } else { q.powi(l as i32) };
                    k as f64 * p
                })
                .sum();
            assert!((truncated_geometric_mean(q, l) - by_pmf).abs() < 1e-12, "q={q}");
        }
        assert_eq!(truncated_geometric_mean(1.0, 20), 20.0);
        assert!((truncated_geometric_mean(0.94, 20) - 11.1).abs() < 0.05);
    }

    #[test]
    fn setup_names_round_trip() {
        for s in [Setup::Transition, Setup::Expression, Setup::Sequence] {
            assert_eq!(s.name().parse::<Setup>().unwrap(), s);
        }
        assert!("bogus".parse::<Setup>().is_err());
    }
}
