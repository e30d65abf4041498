use std::f64::consts::PI;

use rand::Rng;

use super::Synthetic;

/// Parameters of `c(x) = exp[(α/d) Σ cos(β(xᵢ − x*ᵢ + γ))]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostFamilyParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub anchor: Vec<f64>,
}

/// Sampling intervals `(α, β, γ)` for a synthetic problem.
pub fn cost_intervals(kind: Synthetic) -> [(f64, f64); 3] {
    let alpha = (0.75, 1.5);
    let gamma = (0.0, 2.0 * PI);
    let beta = match kind {
        Synthetic::Dropwave => (2.0 * PI / 5.12, 6.0 * PI / 5.12),
        Synthetic::Alpine1 | Synthetic::Ackley => (2.0 * PI, 6.0 * PI),
        Synthetic::Shekel5 => (2.0 * PI / 4.0, 3.0 * PI / 4.0),
    };
    [alpha, beta, gamma]
}

/// Uniform draw of the cost parameters, anchored at the known optimizer.
pub fn sample_cost_params<R: Rng + ?Sized>(kind: Synthetic, rng: &mut R) -> CostFamilyParams {
    let [a, b, g] = cost_intervals(kind);
    let alpha = rng.random_range(a.0..=a.1);
    let beta = rng.random_range(b.0..=b.1);
    let gamma = rng.random_range(g.0..=g.1);
    CostFamilyParams { alpha, beta, gamma, anchor: kind.known_argmax() }
}

/// Cost at `x` in the problem's original coordinates.
pub fn eval_cost(p: &CostFamilyParams, x: &[f64]) -> f64 {
    let d = x.len() as f64;
    let s: f64 = x.iter().zip(&p.anchor).map(|(xi, ai)| (p.beta * (xi - ai + p.gamma)).cos()).sum();
    (p.alpha / d * s).exp()
}
