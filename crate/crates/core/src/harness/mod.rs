//! The budgeted optimization loop, replications and their CSV reports.
//!
//! Each replication starts from a scrambled Sobol design of `2(d + 1)`
//! points, then refits both surrogates after every evaluation and evaluates
//! the maximizer of the configured acquisition until the cumulative cost
//! exceeds the budget. The evaluation that overruns is kept in the trace but
//! flagged and excluded from performance.
//!
//! Randomness per replication `r` comes from independent streams keyed by
//! `(seed, r, purpose)`, so results do not depend on scheduling.

mod report;
mod run;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

pub use report::{aggregate, aggregate_csv, budget_grid, traces_csv, write_outputs, AggregateRow};
pub use run::{run_experiment, run_replication, ExperimentResult, RegretTrace, TraceRow};

use crate::error::{Error, Result};
use crate::optim::OptimizerConfig;
use crate::problems::{load_tabular, ProblemSpec, Synthetic};
use crate::surrogate::SurrogatePriors;
use crate::tree::TreeLayout;

/// Regret floor before taking logs.
pub const REGRET_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum AcqKind {
    Ei,
    EiPuc,
    EiPucCc,
    /// Budgeted multi-step lookahead on the given scenario tree.
    Bmsei(TreeLayout),
}

impl AcqKind {
    pub fn bmsei(lookahead_steps: usize) -> Result<Self> {
        Ok(AcqKind::Bmsei(TreeLayout::default_for(lookahead_steps)?))
    }

    pub fn bmsei_path(lookahead_steps: usize) -> Result<Self> {
        Ok(AcqKind::Bmsei(TreeLayout::path(lookahead_steps)?))
    }
}

impl fmt::Display for AcqKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AcqKind::Ei => f.write_str("ei"),
            AcqKind::EiPuc => f.write_str("ei-puc"),
            AcqKind::EiPucCc => f.write_str("ei-puc-cc"),
            AcqKind::Bmsei(l) if l.is_path() && l.lookahead_steps() > 1 => {
                write!(f, "bmsei-path:{}", l.lookahead_steps())
            }
            AcqKind::Bmsei(l) => {
                write!(f, "bmsei:{}", l.lookahead_steps())?;
                if !l.branching().is_empty() {
                    let b: Vec<String> = l.branching().iter().map(|m| m.to_string()).collect();
                    write!(f, ":{}", b.join(","))?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for AcqKind {
    type Err = Error;

    /// `ei`, `ei-puc`, `ei-puc-cc`, `bmsei:N`, `bmsei:N:m1,m2,..` or
    /// `bmsei-path:N`; underscores are accepted in place of dashes.
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        let bad = || Error::Config(format!("unknown acquisition {s:?}"));
        let steps = |t: &str| t.parse::<usize>().map_err(|_| bad());
        let parts: Vec<&str> = norm.split(':').collect();
        match parts.as_slice() {
            ["ei"] => Ok(AcqKind::Ei),
            ["ei-puc"] => Ok(AcqKind::EiPuc),
            ["ei-puc-cc"] => Ok(AcqKind::EiPucCc),
            ["bmsei", n] => AcqKind::bmsei(steps(n)?),
            ["bmsei", n, b] => {
                let branching = b.split(',').map(|m| m.trim().parse::<usize>().map_err(|_| bad())).collect::<Result<_>>()?;
                Ok(AcqKind::Bmsei(TreeLayout::new(steps(n)?, branching)?))
            }
            ["bmsei-path", n] => AcqKind::bmsei_path(steps(n)?),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    Synthetic(Synthetic),
    Tabular(PathBuf),
}

impl ProblemSource {
    pub fn load(&self) -> Result<ProblemSpec> {
        match self {
            ProblemSource::Synthetic(k) => Ok(k.spec()),
            ProblemSource::Tabular(p) => load_tabular(p),
        }
    }
}

impl FromStr for ProblemSource {
    type Err = Error;

    /// A synthetic problem name, or a path to a tabulated problem.
    fn from_str(s: &str) -> Result<Self> {
        match s.parse::<Synthetic>() {
            Ok(k) => Ok(ProblemSource::Synthetic(k)),
            Err(e) => {
                let p = PathBuf::from(s);
                if p.is_file() {
                    Ok(ProblemSource::Tabular(p))
                } else {
                    Err(e)
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: ProblemSource,
    pub acq: AcqKind,
    pub budget: f64,
    pub replications: usize,
    pub seed: u64,
    pub optimizer: OptimizerConfig,
    pub priors: SurrogatePriors,
    /// Record elapsed time per evaluation; off gives byte-reproducible traces.
    pub record_wallclock: bool,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(problem: ProblemSource, acq: AcqKind, budget: f64) -> Self {
        Self {
            problem,
            acq,
            budget,
            replications: 20,
            seed: 0,
            optimizer: OptimizerConfig::desk(),
            priors: SurrogatePriors::default(),
            record_wallclock: true,
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.budget > 0.0) || !self.budget.is_finite() {
            return Err(Error::Config(format!("budget must be positive, got {}", self.budget)));
        }
        if self.replications == 0 {
            return Err(Error::Config("need at least one replication".into()));
        }
        self.optimizer.validate()
    }
}
