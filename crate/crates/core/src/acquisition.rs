//! Closed-form one-step acquisition functions under independent objective and
//! log-cost posteriors.
//!
//! Every function here has a scalar "partials" form returning the value and
//! its derivatives with respect to the posterior moments, so that callers
//! holding posterior gradients (or dual numbers) can apply the chain rule.

use crate::gp::PosteriorSummary;
use crate::stats::{norm_cdf, norm_pdf};
use crate::surrogate::SurrogatePair;

/// Below this standard deviation a posterior is treated as a point mass.
pub const DEGENERATE_STD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetState {
    pub initial_budget: f64,
    pub spent: f64,
}

impl BudgetState {
    pub fn new(initial_budget: f64) -> Self {
        assert!(initial_budget > 0.0, "budget must be positive");
        Self { initial_budget, spent: 0.0 }
    }

    pub fn with_spent(initial_budget: f64, spent: f64) -> Self {
        Self { spent, ..Self::new(initial_budget) }
    }

    /// May be negative after an overrun.
    pub fn remaining(&self) -> f64 {
        self.initial_budget - self.spent
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcqEval {
    pub value: f64,
    pub gradient: Option<Vec<f64>>,
}

/// Expected improvement and its partials `(value, ∂mean, ∂std, ∂incumbent)`.
pub fn ei_partials(mean: f64, std: f64, incumbent: f64) -> (f64, f64, f64, f64) {
    let delta = mean - incumbent;
    if std <= DEGENERATE_STD {
        return if delta > 0.0 { (delta, 1.0, 0.0, -1.0) } else { (0.0, 0.0, 0.0, 0.0) };
    }
    let z = delta / std;
    let cdf = norm_cdf(z);
    let pdf = norm_pdf(z);
    let value = (delta * cdf + std * pdf).max(0.0);
    (value, cdf, pdf, -cdf)
}

/// Probability that a lognormal cost fits in `remaining`, with partials
/// `(value, ∂ln(remaining), ∂mean_lnc, ∂std_lnc)`.
pub fn prob_cost_fits(remaining: f64, mean_lnc: f64, std_lnc: f64) -> (f64, f64, f64, f64) {
    if remaining <= 0.0 {
        return (0.0, 0.0, 0.0, 0.0);
    }
    let ln_r = remaining.ln();
    if std_lnc <= DEGENERATE_STD {
        return (if mean_lnc <= ln_r { 1.0 } else { 0.0 }, 0.0, 0.0, 0.0);
    }
    let zeta = (ln_r - mean_lnc) / std_lnc;
    let pdf = norm_pdf(zeta);
    (norm_cdf(zeta), pdf / std_lnc, -pdf / std_lnc, -pdf * zeta / std_lnc)
}

/// `E[1/c^ν]` for lognormal `c`, with partials `(value, ∂mean_lnc, ∂std_lnc)`.
pub fn cost_cooling_factor(mean_lnc: f64, std_lnc: f64, nu: f64) -> (f64, f64, f64) {
    let f = (-nu * mean_lnc + 0.5 * nu * nu * std_lnc * std_lnc).exp();
    (f, -nu * f, nu * nu * std_lnc * f)
}

fn chain(
    partials: &[(f64, &[f64])],
    with_grad: bool,
) -> Option<Vec<f64>> {
    if !with_grad {
        return None;
    }
    let d = partials.iter().map(|(_, g)| g.len()).max().unwrap_or(0);
    let mut out = vec![0.0; d];
    for (w, g) in partials {
        for (o, gi) in out.iter_mut().zip(g.iter()) {
            *o += w * gi;
        }
    }
    Some(out)
}

/// Classical expected improvement over `incumbent`.
pub fn ei(obj: PosteriorSummary, incumbent: f64) -> AcqEval {
    AcqEval { value: ei_partials(obj.mean, obj.stddev, incumbent).0, gradient: None }
}

/// Budgeted one-step value: EI times the probability that the evaluation
/// cost fits in the remaining budget; zero once the budget is spent.
pub fn q1(
    obj: PosteriorSummary,
    logcost: PosteriorSummary,
    incumbent: f64,
    budget: &BudgetState,
) -> AcqEval {
    let value = q1_value(obj, logcost, incumbent, budget.remaining());
    AcqEval { value, gradient: None }
}

pub(crate) fn q1_value(
    obj: PosteriorSummary,
    logcost: PosteriorSummary,
    incumbent: f64,
    remaining: f64,
) -> f64 {
    if remaining <= 0.0 {
        return 0.0;
    }
    let e = ei_partials(obj.mean, obj.stddev, incumbent).0;
    let p = prob_cost_fits(remaining, logcost.mean, logcost.stddev).0;
    e * p
}

/// `E[(Y − incumbent)⁺ / C^ν]` for independent normal `Y` and lognormal `C`.
/// With `ν = 1` this is EI per unit cost.
pub fn ei_puc_cc(
    obj: PosteriorSummary,
    logcost: PosteriorSummary,
    incumbent: f64,
    nu: f64,
) -> AcqEval {
    let e = ei_partials(obj.mean, obj.stddev, incumbent).0;
    let (f, _, _) = cost_cooling_factor(logcost.mean, logcost.stddev, nu);
    AcqEval { value: e * f, gradient: None }
}

pub fn ei_puc(obj: PosteriorSummary, logcost: PosteriorSummary, incumbent: f64) -> AcqEval {
    ei_puc_cc(obj, logcost, incumbent, 1.0)
}

/// Cost-cooling exponent: remaining over initial budget, clamped to `[0, 1]`.
pub fn nu_schedule(budget: &BudgetState) -> f64 {
    (budget.remaining().max(0.0) / budget.initial_budget).clamp(0.0, 1.0)
}

/// A one-step acquisition bound to a surrogate, evaluated in the unit box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OneStep {
    Ei,
    EiPucCc { nu: f64 },
    Q1 { remaining: f64 },
}

impl OneStep {
    pub fn evaluate(&self, pair: &SurrogatePair, x: &[f64], with_grad: bool) -> AcqEval {
        let inc = pair.utility;
        let needs_cost = !matches!(self, OneStep::Ei);
        let (obj, dmo, dso) = if with_grad {
            pair.objective.posterior_with_grad(x)
        } else {
            (pair.objective.posterior(x), Vec::new(), Vec::new())
        };
        let (cost, dmc, dsc) = match (needs_cost, with_grad) {
            (false, _) => (PosteriorSummary { mean: 0.0, stddev: 0.0 }, Vec::new(), Vec::new()),
            (true, true) => pair.logcost.posterior_with_grad(x),
            (true, false) => (pair.logcost.posterior(x), Vec::new(), Vec::new()),
        };
        let (e, e_m, e_s, _) = ei_partials(obj.mean, obj.stddev, inc);
        match *self {
            OneStep::Ei => AcqEval {
                value: e,
                gradient: chain(&[(e_m, &dmo), (e_s, &dso)], with_grad),
            },
            OneStep::EiPucCc { nu } => {
                let (f, f_m, f_s) = cost_cooling_factor(cost.mean, cost.stddev, nu);
                AcqEval {
                    value: e * f,
                    gradient: chain(
                        &[(e_m * f, &dmo), (e_s * f, &dso), (e * f_m, &dmc), (e * f_s, &dsc)],
                        with_grad,
                    ),
                }
            }
            OneStep::Q1 { remaining } => {
                let value = q1_value(obj, cost, inc, remaining);
                let (p, _, p_m, p_s) = prob_cost_fits(remaining, cost.mean, cost.stddev);
                AcqEval {
                    value,
                    gradient: chain(
                        &[(e_m * p, &dmo), (e_s * p, &dso), (e * p_m, &dmc), (e * p_s, &dsc)],
                        with_grad,
                    ),
                }
            }
        }
    }
}
