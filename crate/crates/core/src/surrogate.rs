//! The observation set and the pair of independent objective / log-cost
//! models fitted to it.

use crate::error::{Error, Result};
use crate::gp::{fit_map, sample_reparam, GpModel, PriorConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub x: Vec<f64>,
    pub y: f64,
    /// Evaluation cost, strictly positive.
    pub z: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    observations: Vec<Observation>,
    total_cost: f64,
}

impl Dataset {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append an observation. Costs must be positive.
    pub fn push(&mut self, obs: Observation) -> Result<()> {
        if !(obs.z > 0.0) {
            return Err(Error::Config(format!("cost must be positive, got {}", obs.z)));
        }
        self.total_cost += obs.z;
        self.observations.push(obs);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    /// Maximum observed objective value; `None` for an empty set.
    pub fn utility(&self) -> Option<f64> {
        self.observations.iter().map(|o| o.y).reduce(f64::max)
    }

    /// Sum of observed costs.
    pub fn total_cost(&self) -> f64 {
        self.total_cost
    }

    pub fn inputs(&self) -> Vec<Vec<f64>> {
        self.observations.iter().map(|o| o.x.clone()).collect()
    }
}

/// Priors for the two models: standardized objective, raw log-cost.
#[derive(Debug, Clone)]
pub struct SurrogatePriors {
    pub objective: PriorConfig,
    pub logcost: PriorConfig,
}

impl Default for SurrogatePriors {
    fn default() -> Self {
        Self {
            objective: PriorConfig::default(),
            logcost: PriorConfig { standardize: false, ..PriorConfig::default() },
        }
    }
}

#[derive(Debug, Clone)]
pub struct SurrogatePair {
    pub objective: GpModel,
    pub logcost: GpModel,
    /// Best objective value in the real data (fantasies excluded).
    pub utility: f64,
}

impl SurrogatePair {
    /// MAP-fit both models on `dataset`.
    pub fn refit(dataset: &Dataset, priors: &SurrogatePriors) -> Result<Self> {
        if dataset.len() < 2 {
            return Err(Error::InsufficientData { needed: 2, got: dataset.len() });
        }
        let xs = dataset.inputs();
        let ys: Vec<f64> = dataset.observations().iter().map(|o| o.y).collect();
        let lnz: Vec<f64> = dataset.observations().iter().map(|o| o.z.ln()).collect();
        Ok(Self {
            objective: fit_map(&xs, &ys, &priors.objective)?,
            logcost: fit_map(&xs, &lnz, &priors.logcost)?,
            utility: dataset.utility().expect("non-empty"),
        })
    }

    /// Draw `(y, z)` at `x` from the current posteriors using the supplied
    /// standard-normal base samples, and condition both models on the draw.
    /// Hyperparameters stay frozen.
    pub fn fantasize(&self, x: &[f64], eps_y: f64, eps_lnz: f64) -> (SurrogatePair, f64, f64) {
        let y = sample_reparam(self.objective.posterior(x), eps_y);
        let lnz = sample_reparam(self.logcost.posterior(x), eps_lnz);
        let pair = SurrogatePair {
            objective: self.objective.condition(x, y),
            logcost: self.logcost.condition(x, lnz),
            utility: self.utility,
        };
        (pair, y, lnz.exp())
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(costs: &[f64]) -> Dataset {
        let mut ds = Dataset::new();
        for (i, &z) in costs.iter().enumerate() {
            let x = i as f64 / costs.len() as f64;
            ds.push(Observation { x: vec![x], y: (6.0 * x).sin(), z }).unwrap();
        }
        ds
    }

    #[test]
    fn utility_and_total_cost() {
        let ds = data(&[1.0, 2.0, 0.5]);
        assert_eq!(ds.total_cost(), 3.5);
        let best = ds.observations().iter().map(|o| o.y).fold(f64::MIN, f64::max);
        assert_eq!(ds.utility(), Some(best));
        assert_eq!(Dataset::new().utility(), None);
    }

    #[test]
    fn rejects_nonpositive_cost() {
        let mut ds = Dataset::new();
        assert!(ds.push(Observation { x: vec![0.0], y: 0.0, z: 0.0 }).is_err());
    }

    #[test]
    fn constant_cost_e() {
        let ds = data(&[std::f64::consts::E; 5]);
        let pair = SurrogatePair::refit(&ds, &SurrogatePriors::default()).unwrap();
        for x in [0.1, 0.35, 0.7] {
            assert!((pair.logcost.posterior(&[x]).mean - 1.0).abs() < 0.1);
        }
    }

    #[test]
    fn single_observation_is_an_error() {
        assert!(SurrogatePair::refit(&data(&[1.0]), &SurrogatePriors::default()).is_err());
    }

    #[test]
    fn zero_noise_fantasy_is_posterior_mean() {
        let ds = data(&[1.0, 2.0, 0.5, 1.5]);
        let pair = SurrogatePair::refit(&ds, &SurrogatePriors::default()).unwrap();
        let x = [0.33];
        let (_, y, z) = pair.fantasize(&x, 0.0, 0.0);
        assert_eq!(y, pair.objective.posterior(&x).mean);
        assert_eq!(z, pair.logcost.posterior(&x).mean.exp());
        let (_, _, z_low) = pair.fantasize(&x, 0.0, -6.0);
        assert!(z_low > 0.0);
    }
}
