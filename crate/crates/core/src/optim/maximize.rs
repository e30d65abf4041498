use rand::Rng;

use crate::acquisition::{AcqEval, OneStep};
use crate::error::{Error, Result};
use crate::sobol;
use crate::surrogate::SurrogatePair;
use crate::tree::{evaluate_tree, BaseSampleSheet, FantasyBudget, TreeLayout, TreeVariables};

use super::local::{fd_gradient, minimize_box, LocalConfig};

/// Multi-start protocol: score `raw_candidates_per_dim · d` Sobol points,
/// keep the best `starts_per_dim · d` well-separated ones and run a local
/// ascent from each.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub raw_candidates_per_dim: usize,
    pub starts_per_dim: usize,
    pub max_local_iters: usize,
    pub convergence_tol: f64,
    /// Minimum Euclidean distance between two selected starts.
    pub min_start_distance: f64,
    /// Overrides `starts_per_dim · d` when set.
    pub fixed_starts: Option<usize>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self::desk()
    }
}

impl OptimizerConfig {
    pub fn desk() -> Self {
        Self {
            raw_candidates_per_dim: 64,
            starts_per_dim: 4,
            max_local_iters: 100,
            convergence_tol: 1e-7,
            min_start_distance: 0.01,
            fixed_starts: None,
        }
    }

    pub fn paper() -> Self {
        Self { raw_candidates_per_dim: 200, starts_per_dim: 10, max_local_iters: 200, ..Self::desk() }
    }

    pub fn with_fixed_starts(&self, starts: usize) -> Self {
        Self { fixed_starts: Some(starts), ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.raw_candidates_per_dim == 0
            || self.starts_per_dim == 0
            || self.max_local_iters == 0
            || self.fixed_starts == Some(0)
            || !(self.convergence_tol > 0.0)
        {
            return Err(Error::Config("optimizer settings must be positive".into()));
        }
        if self.starts_per_dim > self.raw_candidates_per_dim {
            return Err(Error::Config("more starts than raw candidates".into()));
        }
        Ok(())
    }

    /// `(raw candidates, starts)` for a search space of dimension `d`.
    pub fn counts(&self, d: usize) -> (usize, usize) {
        let raw = (self.raw_candidates_per_dim * d).max(1);
        let starts = self.fixed_starts.unwrap_or(self.starts_per_dim * d).clamp(1, raw);
        (raw, starts)
    }

    fn local(&self) -> LocalConfig {
        LocalConfig { max_iters: self.max_local_iters, gtol: self.convergence_tol, ..LocalConfig::default() }
    }
}

/// An acquisition over the unit box.
pub trait ScalarAcq {
    fn dim(&self) -> usize;
    /// Value, and the gradient when `with_grad` is set and available.
    fn evaluate(&self, x: &[f64], with_grad: bool) -> AcqEval;
}

/// A one-step acquisition bound to a surrogate.
#[derive(Debug, Clone, Copy)]
pub struct OneStepAcq<'a> {
    pub kind: OneStep,
    pub pair: &'a SurrogatePair,
}

impl ScalarAcq for OneStepAcq<'_> {
    fn dim(&self) -> usize {
        self.pair.dim()
    }

    fn evaluate(&self, x: &[f64], with_grad: bool) -> AcqEval {
        self.kind.evaluate(self.pair, x, with_grad)
    }
}

/// A value-only acquisition from a closure; gradients are estimated.
pub struct FnAcq<F> {
    pub dim: usize,
    pub f: F,
}

impl<F: Fn(&[f64]) -> f64> ScalarAcq for FnAcq<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, x: &[f64], _with_grad: bool) -> AcqEval {
        AcqEval { value: (self.f)(x), gradient: None }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Indices of up to `k` candidates, best value first, skipping any closer
/// than `min_dist` to one already chosen. Ties keep candidate order.
pub fn select_starts(candidates: &[Vec<f64>], values: &[f64], k: usize, min_dist: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..candidates.len()).filter(|&i| values[i].is_finite()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    for i in order {
        if chosen.len() == k {
            break;
        }
        if chosen.iter().all(|&c| dist(&candidates[c], &candidates[i]) >= min_dist) {
            chosen.push(i);
        }
    }
    chosen
}

/// Multi-start ascent over `[0, 1]^dim` from the given candidate population.
fn multistart(
    dim: usize,
    eval: &dyn Fn(&[f64], bool) -> AcqEval,
    candidates: &[Vec<f64>],
    n_starts: usize,
    cfg: &OptimizerConfig,
) -> (Vec<f64>, f64) {
    let values: Vec<f64> = candidates.iter().map(|x| eval(x, false).value).collect();
    let starts = select_starts(candidates, &values, n_starts, cfg.min_start_distance);
    let Some(&first) = starts.first() else {
        // Nothing finite: fall back to the first candidate.
        return (candidates[0].clone(), values[0]);
    };
    let mut best = (candidates[first].clone(), values[first]);

    let lower = vec![0.0; dim];
    let upper = vec![1.0; dim];
    let local_cfg = cfg.local();
    for &s in &starts {
        let objective = |x: &[f64], g: &mut [f64]| -> f64 {
            let e = eval(x, true);
            match e.gradient {
                Some(gr) => {
                    for (gi, v) in g.iter_mut().zip(gr) {
                        *gi = -v;
                    }
                }
                None => fd_gradient(|p| -eval(p, false).value, x, &lower, &upper, 1e-6, g),
            }
            -e.value
        };
        let res = minimize_box(objective, &candidates[s], &lower, &upper, &local_cfg);
        let v = -res.f;
        if v > best.1 {
            best = (res.x, v);
        }
    }
    best
}

/// Maximize a one-point acquisition over the unit box.
pub fn maximize_scalar_acq<A, R>(acq: &A, config: &OptimizerConfig, rng: &mut R) -> (Vec<f64>, f64)
where
    A: ScalarAcq + ?Sized,
    R: Rng + ?Sized,
{
    let d = acq.dim();
    let (raw, starts) = config.counts(d);
    let candidates = sobol::points(raw, d, rng);
    multistart(d, &|x, g| acq.evaluate(x, g), &candidates, starts, config)
}

/// The previous iteration's optimized tree, used to seed the next one.
#[derive(Debug, Clone, PartialEq)]
pub struct WarmStartCache {
    pub layout: TreeLayout,
    pub vars: TreeVariables,
    /// Fantasy objective value behind each root child.
    pub root_fantasy_y: Vec<f64>,
    /// Objective value actually observed at the previous root.
    pub observed_y: f64,
}

impl WarmStartCache {
    /// Root child whose fantasy came closest to what was observed.
    pub fn closest_branch(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (j, y) in self.root_fantasy_y.iter().enumerate() {
            let gap = (y - self.observed_y).abs();
            if best.is_none_or(|(_, g)| gap < g) {
                best = Some((j, gap));
            }
        }
        best.map(|(j, _)| j)
    }

    /// Map the subtree under the closest root child onto `layout`, level by
    /// level; nodes without a counterpart take their point from `filler`.
    pub fn assignment(&self, layout: &TreeLayout, filler: &TreeVariables) -> TreeVariables {
        let mut points = filler.points.clone();
        let Some(j) = self.closest_branch() else { return filler.clone() };
        let Some(old_root) = self.layout.child(0, j) else { return filler.clone() };
        let d = filler.points[0].len();
        for (u, point) in points.iter_mut().enumerate() {
            let mut old = Some(old_root);
            for &a in &layout.path_to(u)[1..] {
                old = old.and_then(|o| self.layout.child(o, layout.nodes()[a].child_index));
            }
            if let Some(o) = old {
                if self.vars.points[o].len() == d {
                    point.clone_from(&self.vars.points[o]);
                }
            }
        }
        TreeVariables { points }
    }
}

/// Jointly maximize all node points of the scenario tree.
#[allow(clippy::too_many_arguments)]
pub fn maximize_tree<R: Rng + ?Sized>(
    layout: &TreeLayout,
    pair: &SurrogatePair,
    sheet: &BaseSampleSheet,
    budget: &FantasyBudget,
    config: &OptimizerConfig,
    warm: Option<&WarmStartCache>,
    rng: &mut R,
) -> Result<(TreeVariables, f64)> {
    let d = pair.dim();
    let flat_dim = layout.node_count() * d;
    // Budgets scale with the dimension of the space actually searched.
    let (raw, starts) = config.counts(flat_dim);
    let mut candidates = sobol::points(raw, flat_dim, rng);
    if let Some(w) = warm {
        let filler = TreeVariables::from_flat(&candidates[0], d);
        candidates.push(w.assignment(layout, &filler).flatten());
    }
    // Validate shapes once; evaluation below cannot fail afterwards.
    evaluate_tree(pair, layout, &TreeVariables::from_flat(&candidates[0], d), sheet, budget, false)?;
    let eval = |x: &[f64], g: bool| {
        let e = evaluate_tree(pair, layout, &TreeVariables::from_flat(x, d), sheet, budget, g)
            .expect("validated shapes");
        AcqEval { value: e.value, gradient: e.gradient }
    };
    let (x, v) = multistart(flat_dim, &eval, &candidates, starts, config);
    Ok((TreeVariables::from_flat(&x, d), v))
}
