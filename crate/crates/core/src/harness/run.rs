use std::time::Instant;

use rayon::prelude::*;

use crate::acquisition::{nu_schedule, BudgetState, OneStep};
use crate::error::Result;
use crate::optim::{maximize_scalar_acq, maximize_tree, OneStepAcq, WarmStartCache};
use crate::problems::{sample_cost_params, CostFamilyParams};
use crate::rng::{stream, Purpose};
use crate::sobol;
use crate::surrogate::{Dataset, Observation, SurrogatePair};
use crate::tree::{evaluate_tree, fantasy_budget, BaseSampleSheet, FantasyBudget};

use super::{AcqKind, ProblemSource, RunConfig, REGRET_FLOOR};

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub index: usize,
    /// Point in original coordinates.
    pub x: Vec<f64>,
    pub y: f64,
    pub z: f64,
    pub cumulative_cost: f64,
    /// Best objective among affordable evaluations so far.
    pub best_value: f64,
    pub log_regret: Option<f64>,
    /// Evaluated after the budget ran out; excluded from performance.
    pub excluded: bool,
    pub initial_design: bool,
    pub wallclock_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub replication: usize,
    pub rows: Vec<TraceRow>,
    pub known_max: Option<f64>,
    pub cost_params: Option<CostFamilyParams>,
}

pub(crate) fn log_regret(known_max: Option<f64>, best: f64) -> Option<f64> {
    known_max.map(|m| (m - best).max(REGRET_FLOOR).log10())
}

impl RegretTrace {
    fn included(&self) -> impl Iterator<Item = &TraceRow> {
        self.rows.iter().filter(|r| !r.excluded)
    }

    /// Best value over evaluations that fit in the budget.
    pub fn final_best(&self) -> Option<f64> {
        self.included().map(|r| r.y).reduce(f64::max)
    }

    pub fn final_log_regret(&self) -> Option<f64> {
        self.final_best().and_then(|b| log_regret(self.known_max, b))
    }

    /// Best value of the initial design alone, within the budget.
    pub fn initial_design_best(&self) -> Option<f64> {
        self.included().filter(|r| r.initial_design).map(|r| r.y).reduce(f64::max)
    }

    /// Best value after spending at most `budget` (step function).
    pub fn best_at(&self, budget: f64) -> Option<f64> {
        self.included().filter(|r| r.cumulative_cost <= budget).map(|r| r.y).reduce(f64::max)
    }
}

struct Recorder<'a> {
    cfg: &'a RunConfig,
    known_max: Option<f64>,
    start: Instant,
    rows: Vec<TraceRow>,
    data: Dataset,
    best: f64,
}

impl Recorder<'_> {
    fn spent(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.cumulative_cost)
    }

    fn done(&self) -> bool {
        self.rows.last().is_some_and(|r| r.excluded)
    }

    /// Evaluate at the unit-box point `u`. Returns the observed `y`.
    fn evaluate(&mut self, problem: &crate::problems::ProblemSpec, u: &[f64], initial: bool) -> Result<f64> {
        let x = problem.from_unit(u);
        let y = (problem.objective)(&x);
        let z = (problem.cost)(&x);
        let cumulative_cost = self.spent() + z;
        let excluded = cumulative_cost > self.cfg.budget;
        if !excluded {
            self.best = self.best.max(y);
        }
        self.data.push(Observation { x: u.to_vec(), y, z })?;
        let wallclock_seconds = if self.cfg.record_wallclock { self.start.elapsed().as_secs_f64() } else { 0.0 };
        self.rows.push(TraceRow {
            index: self.rows.len(),
            x,
            y,
            z,
            cumulative_cost,
            best_value: self.best,
            log_regret: log_regret(self.known_max, self.best),
            excluded,
            initial_design: initial,
            wallclock_seconds,
        });
        Ok(y)
    }
}

/// Fantasy budget in force plus the real spending when it was computed.
struct ActiveFantasyBudget {
    budget: FantasyBudget,
    spent_at: f64,
}

/// Run replication `rep` of `cfg`.
pub fn run_replication(cfg: &RunConfig, rep: usize) -> Result<RegretTrace> {
    cfg.validate()?;
    let r = rep as u64;
    let mut problem = cfg.problem.load()?;
    let cost_params = match &cfg.problem {
        ProblemSource::Synthetic(kind) => {
            let p = sample_cost_params(*kind, &mut stream(cfg.seed, r, Purpose::CostParams));
            problem = problem.with_cost_params(p.clone());
            Some(p)
        }
        ProblemSource::Tabular(_) => None,
    };
    let d = problem.dim();
    let mut rec = Recorder {
        cfg,
        known_max: problem.known_max,
        start: Instant::now(),
        rows: Vec::new(),
        data: Dataset::new(),
        best: f64::NEG_INFINITY,
    };

    let mut design_rng = stream(cfg.seed, r, Purpose::InitialDesign);
    for u in sobol::points(2 * (d + 1), d, &mut design_rng) {
        if rec.done() {
            break;
        }
        rec.evaluate(&problem, &u, true)?;
    }

    let mut opt_rng = stream(cfg.seed, r, Purpose::Optimizer);
    let mut sheet_rng = stream(cfg.seed, r, Purpose::TreeSheet);
    let mut rollout_rng = stream(cfg.seed, r, Purpose::Rollout);
    let mut fantasy: Option<ActiveFantasyBudget> = None;
    let mut warm: Option<WarmStartCache> = None;

    while !rec.done() {
        let pair = SurrogatePair::refit(&rec.data, &cfg.priors)?;
        let spent = rec.spent();
        let state = BudgetState::with_spent(cfg.budget, spent);
        let one_step = |kind: OneStep, rng: &mut _| {
            maximize_scalar_acq(&OneStepAcq { kind, pair: &pair }, &cfg.optimizer, rng).0
        };
        let u = match &cfg.acq {
            AcqKind::Ei => one_step(OneStep::Ei, &mut opt_rng),
            AcqKind::EiPuc => one_step(OneStep::EiPucCc { nu: 1.0 }, &mut opt_rng),
            AcqKind::EiPucCc => one_step(OneStep::EiPucCc { nu: nu_schedule(&state) }, &mut opt_rng),
            AcqKind::Bmsei(layout) => {
                let left = |a: &ActiveFantasyBudget| a.budget.amount - (spent - a.spent_at);
                if fantasy.as_ref().is_none_or(|a| left(a) <= 0.0) {
                    let budget =
                        fantasy_budget(&pair, &state, layout.lookahead_steps(), &mut rollout_rng, &cfg.optimizer);
                    fantasy = Some(ActiveFantasyBudget { budget, spent_at: spent });
                }
                let active = fantasy.as_ref().expect("set above");
                let budget = FantasyBudget {
                    amount: left(active).min(state.remaining()),
                    source: active.budget.source,
                };
                let sheet = BaseSampleSheet::draw(layout, &mut sheet_rng);
                let warm_ref = warm.as_ref().filter(|w| w.layout == *layout);
                let (vars, _) =
                    maximize_tree(layout, &pair, &sheet, &budget, &cfg.optimizer, warm_ref, &mut opt_rng)?;
                let root_fantasy_y = evaluate_tree(&pair, layout, &vars, &sheet, &budget, false)?.root_fantasy_y;
                let u = vars.root().to_vec();
                warm = Some(WarmStartCache { layout: layout.clone(), vars, root_fantasy_y, observed_y: f64::NAN });
                u
            }
        };
        let y = rec.evaluate(&problem, &u, false)?;
        if let Some(w) = warm.as_mut() {
            w.observed_y = y;
        }
    }

    Ok(RegretTrace { replication: rep, rows: rec.rows, known_max: problem.known_max, cost_params })
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub traces: Vec<RegretTrace>,
    /// Replications that aborted, with the reason.
    pub failures: Vec<(usize, String)>,
}

/// Run every replication (in parallel, collected in replication order).
pub fn run_experiment(cfg: &RunConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let outcomes: Vec<(usize, Result<RegretTrace>)> =
        (0..cfg.replications).into_par_iter().map(|rep| (rep, run_replication(cfg, rep))).collect();
    let mut traces = Vec::new();
    let mut failures = Vec::new();
    for (rep, out) in outcomes {
        match out {
            Ok(t) => traces.push(t),
            Err(e) => failures.push((rep, e.to_string())),
        }
    }
    Ok(ExperimentResult { traces, failures })
}
