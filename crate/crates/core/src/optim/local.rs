//! Projected limited-memory quasi-Newton minimization on a box.
//!
//! Variables sitting on a bound with the gradient pushing outward are frozen
//! for the iteration; the remaining ones take an L-BFGS step, and the step is
//! projected back onto the box before an Armijo backtracking test.

use std::collections::VecDeque;

#[derive(Debug, Clone)]
pub struct LocalConfig {
    pub max_iters: usize,
    /// Stop when the projected gradient's max-norm falls below this.
    pub gtol: f64,
    /// Stop when the relative decrease of one iteration falls below this.
    pub ftol: f64,
    pub memory: usize,
    /// Max-norm of the very first step, as a fraction of the widest box side.
    pub initial_step: f64,
}

impl Default for LocalConfig {
    fn default() -> Self {
        Self {
            max_iters: 100,
            gtol: 1e-7,
            ftol: 1e-12,
            memory: 8,
            initial_step: 0.05,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LocalResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iters: usize,
    pub evals: usize,
    pub converged: bool,
}

fn project(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((xi, &lo), &hi) in x.iter_mut().zip(lower).zip(upper) {
        *xi = xi.clamp(lo, hi);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Minimize `f` over `[lower, upper]` starting from `x0`.
///
/// `f(x, grad)` returns the objective and writes the gradient into `grad`.
/// Non-finite objective values are treated as infeasible and rejected by the
/// line search. The returned point never has a larger objective than `x0`.
pub fn minimize_box<F>(
    mut f: F,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    cfg: &LocalConfig,
) -> LocalResult
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    project(&mut x, lower, upper);
    let mut g = vec![0.0; n];
    let mut fx = f(&x, &mut g);
    let mut evals = 1;
    if !fx.is_finite() {
        return LocalResult { x, f: fx, iters: 0, evals, converged: false };
    }
    let width = lower
        .iter()
        .zip(upper)
        .map(|(l, u)| u - l)
        .fold(0.0f64, f64::max)
        .max(1e-12);

    let mut mem: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(cfg.memory);
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut converged = false;
    let mut iters = 0;

    while iters < cfg.max_iters {
        // Free set and projected-gradient stationarity.
        let free: Vec<bool> = (0..n)
            .map(|i| !((x[i] <= lower[i] && g[i] > 0.0) || (x[i] >= upper[i] && g[i] < 0.0)))
            .collect();
        let pg = (0..n)
            .map(|i| (x[i] - g[i]).clamp(lower[i], upper[i]) - x[i])
            .collect::<Vec<_>>();
        if inf_norm(&pg) < cfg.gtol {
            converged = true;
            break;
        }

        // Two-loop recursion restricted to free variables.
        let mut d: Vec<f64> = (0..n).map(|i| if free[i] { -g[i] } else { 0.0 }).collect();
        let mut alphas = Vec::with_capacity(mem.len());
        for (s, y, rho) in mem.iter().rev() {
            let a = rho * dot(s, &d);
            for i in 0..n {
                d[i] -= a * y[i];
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = mem.back() {
            let gamma = dot(s, y) / dot(y, y);
            d.iter_mut().for_each(|di| *di *= gamma);
        }
        for ((s, y, rho), a) in mem.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &d);
            for i in 0..n {
                d[i] += (a - b) * s[i];
            }
        }
        for i in 0..n {
            if !free[i] {
                d[i] = 0.0;
            }
        }
        if dot(&d, &g) >= 0.0 {
            d = (0..n).map(|i| if free[i] { -g[i] } else { 0.0 }).collect();
            mem.clear();
        }

        let mut t = if mem.is_empty() {
            (cfg.initial_step * width / inf_norm(&d).max(1e-300)).min(1.0)
        } else {
            1.0
        };

        let mut accepted = false;
        let mut f_new = f64::INFINITY;
        for _ in 0..50 {
            for i in 0..n {
                x_new[i] = x[i] + t * d[i];
            }
            project(&mut x_new, lower, upper);
            let step: Vec<f64> = (0..n).map(|i| x_new[i] - x[i]).collect();
            if inf_norm(&step) == 0.0 {
                break;
            }
            f_new = f(&x_new, &mut g_new);
            evals += 1;
            if f_new.is_finite() && f_new <= fx + 1e-4 * dot(&g, &step) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        iters += 1;
        if !accepted {
            // No descent along the projected path; the point is stationary
            // up to line-search resolution.
            converged = mem.is_empty();
            if mem.is_empty() {
                break;
            }
            mem.clear();
            continue;
        }

        let s: Vec<f64> = (0..n).map(|i| x_new[i] - x[i]).collect();
        let y: Vec<f64> = (0..n).map(|i| g_new[i] - g[i]).collect();
        let sy = dot(&s, &y);
        if sy > 1e-10 * (dot(&s, &s) * dot(&y, &y)).sqrt() {
            if mem.len() == cfg.memory {
                mem.pop_front();
            }
            mem.push_back((s, y, 1.0 / sy));
        }
        let decrease = fx - f_new;
        x.copy_from_slice(&x_new);
        g.copy_from_slice(&g_new);
        fx = f_new;
        if decrease <= cfg.ftol * fx.abs().max(1.0) {
            converged = true;
            break;
        }
    }

    LocalResult { x, f: fx, iters, evals, converged }
}

/// Central finite-difference gradient, one-sided at the box boundary.
pub fn fd_gradient<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x: &[f64],
    lower: &[f64],
    upper: &[f64],
    h: f64,
    out: &mut [f64],
) {
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let hi = (x[i] + h).min(upper[i]);
        let lo = (x[i] - h).max(lower[i]);
        xp[i] = hi;
        let fp = f(&xp);
        xp[i] = lo;
        let fm = f(&xp);
        xp[i] = x[i];
        out[i] = if hi > lo { (fp - fm) / (hi - lo) } else { 0.0 };
    }
}
