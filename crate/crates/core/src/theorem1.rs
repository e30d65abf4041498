//! Monte-Carlo simulation of greedy and reference policies on the discrete
//! instances where cost-aware and cost-agnostic expected improvement both
//! perform arbitrarily badly.
//!
//! Beliefs are exact: priors are independent normals, there is no
//! observation noise, and a measured point's value becomes known.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::acquisition::ei_partials;
use crate::error::Result;
use crate::problems::{affordable_low_points, make_theorem1_instance, DiscreteInstance, Variant};
use crate::rng::{stream, Purpose};
use crate::stats::mean_and_se;

/// Slack on budget comparisons so that `N` cheap evaluations summing to the
/// budget up to rounding stay affordable.
const BUDGET_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscretePolicy {
    Ei,
    EiPuc,
    /// Measure the expensive point once.
    HighOnce,
    /// Measure cheap points only, in index order.
    LowOnly,
}

impl DiscretePolicy {
    pub fn name(self) -> &'static str {
        match self {
            DiscretePolicy::Ei => "ei",
            DiscretePolicy::EiPuc => "ei_puc",
            DiscretePolicy::HighOnce => "high_once",
            DiscretePolicy::LowOnly => "low_only",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyValueEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_trajectories: usize,
}

/// What happened along one trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySummary {
    pub gain: f64,
    pub first_measured: Option<usize>,
    pub measured_high: bool,
    pub evaluations: usize,
    pub spent: f64,
    pub utility_monotone: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub estimate: PolicyValueEstimate,
    pub trajectories: Vec<TrajectorySummary>,
}

/// Maximal runs of points with identical prior and cost. Within a run the
/// unmeasured points are interchangeable, so the lowest one stands for all.
fn groups(inst: &DiscreteInstance) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for i in 0..inst.n_points() {
        let same = |j: usize| {
            inst.means[j] == inst.means[i] && inst.variances[j] == inst.variances[i] && inst.costs[j] == inst.costs[i]
        };
        match out.last_mut() {
            Some((start, end)) if *end == i && same(*start) => *end = i + 1,
            _ => out.push((i, i + 1)),
        }
    }
    out
}

fn choose(
    inst: &DiscreteInstance,
    policy: DiscretePolicy,
    groups: &[(usize, usize)],
    next: &[usize],
    incumbent: f64,
    remaining: f64,
) -> Option<usize> {
    let affordable = |i: usize| inst.costs[i] <= remaining + BUDGET_SLACK;
    match policy {
        DiscretePolicy::HighOnce => {
            let h = inst.high_point();
            (next[groups.len() - 1] == h && affordable(h)).then_some(h)
        }
        DiscretePolicy::LowOnly => groups
            .iter()
            .zip(next)
            .find(|((_, end), &n)| n < *end && n != inst.high_point() && affordable(n))
            .map(|(_, &n)| n),
        DiscretePolicy::Ei | DiscretePolicy::EiPuc => {
            let mut best: Option<(usize, f64)> = None;
            for ((_, end), &n) in groups.iter().zip(next) {
                if n >= *end || !affordable(n) {
                    continue;
                }
                let ei = ei_partials(inst.means[n], inst.variances[n].sqrt(), incumbent).0;
                let score = if policy == DiscretePolicy::EiPuc { ei / inst.costs[n] } else { ei };
                if best.is_none_or(|(_, s)| score > s) {
                    best = Some((n, score));
                }
            }
            best.map(|(i, _)| i)
        }
    }
}

fn trajectory<R: Rng + ?Sized>(
    inst: &DiscreteInstance,
    policy: DiscretePolicy,
    groups: &[(usize, usize)],
    rng: &mut R,
) -> TrajectorySummary {
    let mut next: Vec<usize> = groups.iter().map(|g| g.0).collect();
    let mut incumbent = inst.initial_value;
    let mut spent = 0.0;
    let mut s = TrajectorySummary {
        gain: 0.0,
        first_measured: None,
        measured_high: false,
        evaluations: 0,
        spent: 0.0,
        utility_monotone: true,
    };
    while let Some(i) = choose(inst, policy, groups, &next, incumbent, inst.budget - spent) {
        let g = groups.iter().position(|&(a, b)| a <= i && i < b).expect("point in a group");
        next[g] += 1;
        let z: f64 = rng.sample(StandardNormal);
        let y = inst.means[i] + inst.variances[i].sqrt() * z;
        let updated = incumbent.max(y);
        s.utility_monotone &= updated >= incumbent;
        incumbent = updated;
        spent += inst.costs[i];
        s.first_measured.get_or_insert(i);
        s.measured_high |= i == inst.high_point();
        s.evaluations += 1;
    }
    s.gain = incumbent - inst.initial_value;
    s.spent = spent;
    s
}

/// Estimate the expected utility gain of `policy` from `n_trajectories`
/// independent trajectories; trajectory `t` draws from its own stream.
pub fn simulate(inst: &DiscreteInstance, policy: DiscretePolicy, n_trajectories: usize, seed: u64) -> Simulation {
    let groups = groups(inst);
    let trajectories: Vec<TrajectorySummary> = (0..n_trajectories.max(1))
        .into_par_iter()
        .map(|t| trajectory(inst, policy, &groups, &mut stream(seed, t as u64, Purpose::Trajectory)))
        .collect();
    let gains: Vec<f64> = trajectories.iter().map(|t| t.gain).collect();
    let (mean, std_error) = mean_and_se(&gains);
    Simulation { estimate: PolicyValueEstimate { mean, std_error, n_trajectories: gains.len() }, trajectories }
}

/// `E[Z⁺]` for standard normal `Z`.
pub fn expected_positive_part() -> f64 {
    1.0 / (2.0 * std::f64::consts::PI).sqrt()
}

/// Upper bound `ε √(2 ln(N + 1))` on the greedy cost-aware value.
pub fn ei_puc_value_bound(epsilon: f64, delta: f64) -> f64 {
    let n = affordable_low_points(epsilon, delta) as f64;
    epsilon * (2.0 * (n + 1.0).ln()).sqrt()
}

/// Lower bound `(1 − ε) √(a ln N)`, `a = 1/(π ln 2)`, on measuring cheap
/// points only.
pub fn low_only_value_bound(epsilon: f64, delta: f64) -> f64 {
    let n = affordable_low_points(epsilon, delta) as f64;
    let a = 1.0 / (std::f64::consts::PI * std::f64::consts::LN_2);
    (1.0 - epsilon) * (a * n.ln()).sqrt()
}

/// Reference-to-greedy comparison on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioRow {
    pub epsilon: f64,
    pub delta: f64,
    pub variant: Variant,
    pub reference_policy: DiscretePolicy,
    pub greedy_policy: DiscretePolicy,
    pub reference: PolicyValueEstimate,
    pub greedy: PolicyValueEstimate,
    pub ratio: f64,
    /// Delta-method standard error of the ratio.
    pub ratio_se: f64,
}

fn ratio_with_se(a: &PolicyValueEstimate, b: &PolicyValueEstimate) -> (f64, f64) {
    let r = a.mean / b.mean;
    let rel = (a.std_error / a.mean).powi(2) + (b.std_error / b.mean).powi(2);
    (r, r.abs() * rel.sqrt())
}

/// Simulate both variants at every `(ε, δ)`: high-once against EI per unit
/// cost, and cheap-points-only against EI.
pub fn ratio_report(pairs: &[(f64, f64)], n_trajectories: usize, seed: u64) -> Result<Vec<RatioRow>> {
    let mut rows = Vec::with_capacity(2 * pairs.len());
    for &(epsilon, delta) in pairs {
        for (variant, reference_policy, greedy_policy) in [
            (Variant::ForEiPuc, DiscretePolicy::HighOnce, DiscretePolicy::EiPuc),
            (Variant::ForEi, DiscretePolicy::LowOnly, DiscretePolicy::Ei),
        ] {
            let inst = make_theorem1_instance(epsilon, delta, variant)?;
            let reference = simulate(&inst, reference_policy, n_trajectories, seed).estimate;
            let greedy = simulate(&inst, greedy_policy, n_trajectories, seed).estimate;
            let (ratio, ratio_se) = ratio_with_se(&reference, &greedy);
            rows.push(RatioRow {
                epsilon,
                delta,
                variant,
                reference_policy,
                greedy_policy,
                reference,
                greedy,
                ratio,
                ratio_se,
            });
        }
    }
    Ok(rows)
}

/// CSV with one line per (instance, policy); `ratio` is the reference
/// policy's value over this policy's value.
pub fn ratio_csv(rows: &[RatioRow]) -> String {
    let mut out = String::from("epsilon,delta,variant,policy,mean,std_error,ratio\n");
    for r in rows {
        for (policy, est) in [(r.reference_policy, &r.reference), (r.greedy_policy, &r.greedy)] {
            let ratio = r.reference.mean / est.mean;
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{},{},{:.16e},{:.16e},{:.16e}",
                r.epsilon,
                r.delta,
                r.variant.name(),
                policy.name(),
                est.mean,
                est.std_error,
                ratio
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grouping() {
        let inst = make_theorem1_instance(0.1, 0.1, Variant::ForEiPuc).unwrap();
        assert_eq!(groups(&inst), vec![(0, 11), (11, 12)]);
    }

    #[test]
    fn high_once_measures_exactly_once() {
        let inst = make_theorem1_instance(0.1, 0.1, Variant::ForEiPuc).unwrap();
        let sim = simulate(&inst, DiscretePolicy::HighOnce, 2000, 3);
        assert!(sim.trajectories.iter().all(|t| t.evaluations == 1 && t.measured_high));
        let ez = expected_positive_part();
        assert!((sim.estimate.mean - ez).abs() < 4.0 * sim.estimate.std_error);
    }

    #[test]
    fn ei_puc_stays_on_cheap_points() {
        let inst = make_theorem1_instance(0.1, 0.1, Variant::ForEiPuc).unwrap();
        let sim = simulate(&inst, DiscretePolicy::EiPuc, 500, 4);
        for t in &sim.trajectories {
            assert!(!t.measured_high);
            assert_eq!(t.evaluations, 11);
            assert!(t.spent <= inst.budget + 1e-9);
            assert!(t.utility_monotone);
        }
    }

    #[test]
    fn ei_takes_the_expensive_point_and_stops() {
        let inst = make_theorem1_instance(0.2, 0.1, Variant::ForEi).unwrap();
        let sim = simulate(&inst, DiscretePolicy::Ei, 500, 5);
        for t in &sim.trajectories {
            assert_eq!(t.first_measured, Some(inst.high_point()));
            assert_eq!(t.evaluations, 1);
        }
    }

    #[test]
    fn bounds_match_hand_values() {
        assert!((ei_puc_value_bound(0.01, 0.1) - 0.0307).abs() < 1e-4);
        assert!((low_only_value_bound(0.01, 0.1) - 0.99 * (110f64.ln() / (std::f64::consts::PI * 2f64.ln())).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn csv_shape() {
        let rows = ratio_report(&[(0.2, 0.1)], 200, 1).unwrap();
        let csv = ratio_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "epsilon,delta,variant,policy,mean,std_error,ratio");
        assert_eq!(lines.len(), 5);
        assert!(lines.iter().skip(1).all(|l| l.split(',').count() == 7));
    }
}
