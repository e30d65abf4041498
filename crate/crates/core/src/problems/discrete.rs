use crate::error::{Error, Result};

/// Which policy the instance is built to defeat.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Cheap low-variance points lure EI per unit cost.
    ForEiPuc,
    /// Cheap points of nearly full variance, ignored by plain EI.
    ForEi,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::ForEiPuc => "for_eipuc",
            Variant::ForEi => "for_ei",
        }
    }
}

/// A discrete problem with independent normal priors, no observation noise
/// and known costs. Points `0..k` are cheap, point `k` is the expensive
/// high-variance one. The already-measured reference point with value 0 is
/// implicit: it is the initial incumbent.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteInstance {
    pub k: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub variant: Variant,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
    pub costs: Vec<f64>,
    pub budget: f64,
    pub initial_value: f64,
}

/// Slack for ratios like `1.1 / 0.1` that land a rounding error off an integer.
const INTEGER_SLACK: f64 = 1e-9;

/// `⌈(1 + δ)/ε⌉`.
pub fn low_point_count(epsilon: f64, delta: f64) -> usize {
    ((1.0 + delta) / epsilon - INTEGER_SLACK).ceil() as usize
}

/// `⌊(1 + δ)/ε⌋`: how many cheap points the budget pays for.
pub fn affordable_low_points(epsilon: f64, delta: f64) -> usize {
    ((1.0 + delta) / epsilon + INTEGER_SLACK).floor() as usize
}

pub fn make_theorem1_instance(epsilon: f64, delta: f64, variant: Variant) -> Result<DiscreteInstance> {
    if !(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::Config(format!("need 0 < epsilon < 1 and delta > 0, got {epsilon}, {delta}")));
    }
    let k = low_point_count(epsilon, delta);
    let low_var = match variant {
        Variant::ForEiPuc => epsilon * epsilon,
        Variant::ForEi => (1.0 - epsilon) * (1.0 - epsilon),
    };
    let mut variances = vec![low_var; k];
    variances.push(1.0);
    let mut costs = vec![epsilon; k];
    costs.push(1.0 + delta);
    Ok(DiscreteInstance {
        k,
        epsilon,
        delta,
        variant,
        means: vec![0.0; k + 1],
        variances,
        costs,
        budget: 1.0 + delta,
        initial_value: 0.0,
    })
}

impl DiscreteInstance {
    pub fn n_points(&self) -> usize {
        self.k + 1
    }

    pub fn high_point(&self) -> usize {
        self.k
    }
}
