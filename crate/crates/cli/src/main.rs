//! `budgetbo`: run budgeted optimization experiments and the discrete
//! counterexample simulations.

mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use budgetbo::harness::{run_experiment, write_outputs, ProblemSource};
use budgetbo::problems::Synthetic;
use budgetbo::theorem1::{ratio_csv, ratio_report};
use budgetbo::{AcqKind, OptimizerConfig, RunConfig};
use clap::{Parser, Subcommand, ValueEnum};

use config::FileConfig;

#[derive(Parser, Debug)]
#[command(name = "budgetbo", version, about = "Budget-constrained Bayesian optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Preset {
    Desk,
    Paper,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run replications of one method on one problem.
    Run {
        /// Synthetic problem name or path to a tabulated problem.
        #[arg(long)]
        problem: Option<String>,
        /// ei | ei-puc | ei-puc-cc | bmsei:N[:m1,m2,..] | bmsei-path:N
        #[arg(long)]
        acq: Option<String>,
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Directory receiving traces.csv and aggregate.csv.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        optimizer_preset: Option<Preset>,
        /// Write 0 in the wallclock column so reruns are byte-identical.
        #[arg(long)]
        no_wallclock: bool,
        /// Key-value file with the same settings; flags take precedence.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Simulate greedy and reference policies on the discrete instances.
    VerifyTheorem1 {
        /// Comma-separated epsilons.
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05,0.01")]
        epsilons: Vec<f64>,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 100_000)]
        trajectories: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// List the built-in problems.
    ListProblems,
}

#[allow(clippy::too_many_arguments)]
fn run_config(
    problem: Option<String>,
    acq: Option<String>,
    budget: Option<f64>,
    reps: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    preset: Option<Preset>,
    no_wallclock: bool,
    file: FileConfig,
) -> Result<RunConfig> {
    let problem = problem.or(file.problem).ok_or_else(|| anyhow!("--problem is required"))?;
    let acq = acq.or(file.acq).unwrap_or_else(|| "ei".into());
    let budget = budget.or(file.budget).ok_or_else(|| anyhow!("--budget is required"))?;
    let preset = match (preset, file.optimizer_preset.as_deref()) {
        (Some(p), _) => p,
        (None, None) => Preset::Desk,
        (None, Some(s)) => Preset::from_str(s, true).map_err(|e| anyhow!("optimizer-preset: {e}"))?,
    };
    let mut cfg = RunConfig::new(problem.parse::<ProblemSource>()?, acq.parse::<AcqKind>()?, budget);
    cfg.replications = reps.or(file.reps).unwrap_or(cfg.replications);
    cfg.seed = seed.or(file.seed).unwrap_or(0);
    cfg.optimizer = match preset {
        Preset::Desk => OptimizerConfig::desk(),
        Preset::Paper => OptimizerConfig::paper(),
    };
    cfg.record_wallclock = !(no_wallclock || file.no_wallclock.unwrap_or(false));
    cfg.output = out.or(file.out);
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { problem, acq, budget, reps, seed, out, optimizer_preset, no_wallclock, config } => {
            let file = config.as_deref().map(FileConfig::load).transpose()?.unwrap_or_default();
            let cfg = run_config(problem, acq, budget, reps, seed, out, optimizer_preset, no_wallclock, file)?;
            let result = run_experiment(&cfg)?;
            for (rep, why) in &result.failures {
                eprintln!("replication {rep} failed: {why}");
            }
            if result.traces.is_empty() {
                bail!("every replication failed");
            }
            let out = cfg.output.clone().unwrap_or_else(|| PathBuf::from("."));
            write_outputs(&out, &result.traces, cfg.budget).with_context(|| format!("writing {}", out.display()))?;
            let finals: Vec<f64> = result.traces.iter().filter_map(|t| t.final_log_regret()).collect();
            if !finals.is_empty() {
                let mean = finals.iter().sum::<f64>() / finals.len() as f64;
                println!("{} on {}: {} replications, mean final log10 regret {mean:.4}", cfg.acq, problem_name(&cfg), finals.len());
            }
            println!("wrote {}", out.display());
        }
        Command::VerifyTheorem1 { epsilons, delta, trajectories, seed } => {
            let pairs: Vec<(f64, f64)> = epsilons.iter().map(|&e| (e, delta)).collect();
            let rows = ratio_report(&pairs, trajectories, seed)?;
            print!("{}", ratio_csv(&rows));
        }
        Command::ListProblems => {
            for k in Synthetic::ALL {
                let (lo, hi) = k.bounds();
                println!("{:<10} d={} box=[{lo}, {hi}]^{} max={}", k.name(), k.dim(), k.dim(), k.known_max());
            }
        }
    }
    Ok(())
}

fn problem_name(cfg: &RunConfig) -> String {
    match &cfg.problem {
        ProblemSource::Synthetic(k) => k.name().to_string(),
        ProblemSource::Tabular(p) => p.display().to_string(),
    }
}
