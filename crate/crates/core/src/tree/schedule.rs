use rand::Rng;
use rand_distr::StandardNormal;

use crate::acquisition::{nu_schedule, BudgetState, OneStep};
use crate::optim::{maximize_scalar_acq, OneStepAcq, OptimizerConfig};
use crate::surrogate::SurrogatePair;

use super::{BudgetSource, FantasyBudget};

/// Starts used by each base-policy maximization during a rollout.
pub const ROLLOUT_STARTS: usize = 4;

/// Budget the next `n_steps` evaluations would plausibly spend: roll out the
/// cost-cooled EI-per-unit-cost policy on fantasy observations and cap the
/// accumulated fantasy cost at the true remaining budget.
pub fn fantasy_budget<R: Rng + ?Sized>(
    pair: &SurrogatePair,
    budget: &BudgetState,
    n_steps: usize,
    rng: &mut R,
    config: &OptimizerConfig,
) -> FantasyBudget {
    let remaining = budget.remaining();
    if remaining <= 0.0 {
        return FantasyBudget { amount: remaining.max(0.0), source: BudgetSource::TrueRemaining };
    }
    let cfg = config.with_fixed_starts(ROLLOUT_STARTS);
    let mut state = pair.clone();
    let mut total = 0.0;
    for _ in 0..n_steps.max(1) {
        let nu = nu_schedule(&BudgetState::with_spent(budget.initial_budget, budget.spent + total));
        let acq = OneStepAcq { kind: OneStep::EiPucCc { nu }, pair: &state };
        let (x, _) = maximize_scalar_acq(&acq, &cfg, rng);
        let (ey, ez) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
        let (mut next, y, z) = state.fantasize(&x, ey, ez);
        next.utility = next.utility.max(y);
        total += z;
        state = next;
        if total >= remaining {
            break;
        }
    }
    if total < remaining {
        FantasyBudget { amount: total, source: BudgetSource::RolloutCapped }
    } else {
        FantasyBudget { amount: remaining, source: BudgetSource::TrueRemaining }
    }
}
