use std::fs::OpenOptions;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use taa_core::graph::GoalGraph;
use taa_core::language::build_inventory;
use taa_core::learner::LearnerState;
use taa_core::tutor::SceneIntervention;
use taa_harness::eval::{self, Agent, EvalResult, Setup};
use taa_harness::experiments::{self, BETA_GRID};
use taa_harness::run::{load_snapshot, run_training};
use taa_harness::ExperimentConfig;

#[derive(Parser)]
#[command(name = "taa", version, about = "Teachable autotelic agents in a semantic block world")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SetupArg {
    Transition,
    Expression,
    Sequence,
}

impl From<SetupArg> for Setup {
    fn from(s: SetupArg) -> Self {
        match s {
            SetupArg::Transition => Setup::Transition,
            SetupArg::Expression => Setup::Expression,
            SetupArg::Sequence => Setup::Sequence,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train one agent; writes metrics.jsonl and summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a trained snapshot (summary.json) and append a row to eval.csv.
    Eval {
        #[arg(long, value_enum)]
        setup: SetupArg,
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=5))]
        attempts: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Defaults to eval.csv next to the snapshot.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Episodes to full discovery for each social rate.
    SweepBeta {
        #[arg(long, value_delimiter = ',', default_values_t = BETA_GRID.to_vec())]
        betas: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        /// Base configuration; the hard three-block setting by default.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        episodes: Option<usize>,
    },
    /// First stack discoveries with pre-stacked versus scattered initial scenes.
    AblateScene {
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        episodes: Option<usize>,
    },
    /// Bisect the competence scale until one-attempt transition success is in range.
    Calibrate {
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0.85)]
        low: f64,
        #[arg(long, default_value_t = 0.93)]
        high: f64,
    },
    /// Serve the HTTP and WebSocket API.
    Serve {
        /// Overrides TAA_PORT.
        #[arg(long)]
        port: Option<u16>,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
    },
}

fn read_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(ExperimentConfig::from_json(&text)?)
}

fn base_config(path: Option<&Path>, fallback: ExperimentConfig, episodes: Option<usize>) -> Result<ExperimentConfig> {
    let mut config = match path {
        Some(p) => read_config(p)?,
        None => fallback,
    };
    if let Some(e) = episodes {
        config.episodes = e;
    }
    config.output = None;
    config.validate()?;
    Ok(config)
}

fn append_csv(path: &Path, row: &EvalResult) -> Result<()> {
    let fresh = !path.exists();
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    if fresh {
        writeln!(file, "{}", EvalResult::CSV_HEADER)?;
    }
    writeln!(file, "{}", row.csv_row())?;
    Ok(())
}

fn evaluate(setup: Setup, snapshot: &Path, attempts: usize, seed: u64) -> Result<EvalResult> {
    let snap = load_snapshot(snapshot)?;
    let learner = LearnerState::try_from(snap.learner)?;
    let graph = GoalGraph::shared(learner.world);
    let inventory = build_inventory(learner.world.n_blocks())?;
    let agent = Agent {
        learner: &learner,
        graph: &graph,
        inventory: &inventory,
        competence: snap.config.competence,
        max_moves: snap.config.max_moves,
    };
    Ok(match setup {
        Setup::Transition => eval::eval_transition(&agent, attempts, seed)?,
        Setup::Expression => eval::eval_expression(&agent, eval::EXPRESSIONS, attempts, seed)?,
        Setup::Sequence => {
            eval::eval_sequence(&[agent], eval::SEQUENCE_AGENTS, eval::SEQUENCE_LENGTH, attempts, seed)?
        }
    })
}

fn strategy_label(s: &SceneIntervention) -> String {
    match s {
        SceneIntervention::RandomScatter => "random_scatter".into(),
        SceneIntervention::PreStacked { k } => format!("pre_stacked_{k}"),
        SceneIntervention::NearGoal { goal, distance } => format!("near_goal_{goal}_{distance}"),
    }
}

fn seeds(n: u64) -> Vec<u64> {
    (0..n).collect()
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Run { config, seed, out } => {
            let mut config = read_config(&config)?;
            if let Some(s) = seed {
                config.seed = s;
            }
            config.output = Some(out.clone());
            let run = run_training(&config)?;
            let s = &run.summary;
            println!(
                "{} episodes, {} social, success rate {:.3}, discovered {}/{}",
                s.episodes, s.social_episodes, s.success_rate, s.discovered, s.total_configurations
            );
            println!("wrote {}", out.display());
        }
        Command::Eval { setup, snapshot, attempts, seed, out } => {
            let result = evaluate(setup.into(), &snapshot, attempts as usize, seed)?;
            let out = out.unwrap_or_else(|| snapshot.with_file_name("eval.csv"));
            append_csv(&out, &result)?;
            println!("{}\n{}", EvalResult::CSV_HEADER, result.csv_row());
        }
        Command::SweepBeta { betas, seeds: n, config, episodes } => {
            if betas.iter().any(|b| !(0.0..=1.0).contains(b)) {
                bail!("betas must lie in [0, 1]");
            }
            let base = base_config(config.as_deref(), experiments::hard_setting(), episodes)?;
            let rows = experiments::sweep_beta(&base, &betas, &seeds(n))?;
            println!("{}", experiments::SweepRow::CSV_HEADER);
            for row in &rows {
                println!("{}", row.csv_row());
            }
        }
        Command::AblateScene { seeds: n, config, episodes } => {
            let base = base_config(config.as_deref(), ExperimentConfig::default(), episodes)?;
            let strategies = [SceneIntervention::PreStacked { k: 2 }, SceneIntervention::RandomScatter];
            let ablation = experiments::ablation_scene_setting(&base, &strategies, &seeds(n))?;
            println!("strategy,mean_stack2,mean_stack3,stderr_stack3,censored_stack3");
            for s in &ablation.summaries {
                println!(
                    "{},{:.2},{:.2},{:.2},{}",
                    strategy_label(&s.strategy),
                    s.mean_stack2,
                    s.mean_stack3,
                    s.stderr_stack3,
                    s.censored_stack3
                );
            }
            if let Some((wins, trials, p)) = ablation.sign_test {
                println!("sign test: pre-stacked earlier in {wins}/{trials} seeds, one-sided p = {p:.5}");
            }
        }
        Command::Calibrate { seeds: n, config, low, high } => {
            let base = base_config(config.as_deref(), ExperimentConfig::default(), None)?;
            let c = experiments::calibrate(&base, &seeds(n), low, high)?;
            println!("{}", serde_json::to_string_pretty(&c)?);
        }
        Command::Serve { port, host } => {
            let env = std::env::var(taa_service::PORT_ENV).ok();
            let port = taa_service::resolve_port(port, env.as_deref()).map_err(anyhow::Error::msg)?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(taa_service::serve(SocketAddr::new(host, port)))?;
        }
    }
    Ok(())
}

