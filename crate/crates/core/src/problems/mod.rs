//! Benchmark problems: synthetic objectives with the parametric cost family,
//! the discrete instances on which greedy policies fail, and tabulated
//! problems loaded from disk.
//!
//! Every problem is posed as maximization.

mod cost;
mod discrete;
mod tabular;

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

pub use cost::{cost_intervals, eval_cost, sample_cost_params, CostFamilyParams};
pub use discrete::{
    affordable_low_points, low_point_count, make_theorem1_instance, DiscreteInstance, Variant,
};
pub use tabular::{load_tabular, Grid};

use crate::error::Error;

pub type Oracle = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A black-box problem on a box, in original coordinates.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub objective: Oracle,
    pub cost: Oracle,
    pub known_max: Option<f64>,
    pub known_argmax: Option<Vec<f64>>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("known_max", &self.known_max)
            .field("known_argmax", &self.known_argmax)
            .finish_non_exhaustive()
    }
}

impl ProblemSpec {
    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Map a unit-box point to original coordinates.
    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(t, (l, h))| l + t * (h - l))
            .collect()
    }

    pub fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (l, h))| (v - l) / (h - l))
            .collect()
    }

    /// Replace the cost oracle with a member of the cost family.
    pub fn with_cost_params(mut self, params: CostFamilyParams) -> Self {
        self.cost = Arc::new(move |x| eval_cost(&params, x));
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Synthetic {
    Dropwave,
    Alpine1,
    Ackley,
    Shekel5,
}

/// Maximum of the Shekel-5 sum, located by local search from (4, 4, 4, 4).
pub const SHEKEL5_MAX: f64 = 10.153_199_679_058_227;
pub const SHEKEL5_ARGMAX: [f64; 4] = [4.000_037_152_819_676, 4.000_133_276_591_56, 4.000_037_152_819_676, 4.000_133_276_591_56];

const SHEKEL_C: [[f64; 4]; 5] = [
    [4.0, 4.0, 4.0, 4.0],
    [1.0, 1.0, 1.0, 1.0],
    [8.0, 8.0, 8.0, 8.0],
    [6.0, 6.0, 6.0, 6.0],
    [3.0, 7.0, 3.0, 7.0],
];
const SHEKEL_B: [f64; 5] = [0.1, 0.2, 0.2, 0.4, 0.4];

pub fn dropwave(x: &[f64]) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    (1.0 + (12.0 * r2.sqrt()).cos()) / (0.5 * r2 + 2.0)
}

pub fn alpine1(x: &[f64]) -> f64 {
    -x.iter().map(|v| (v * v.sin() + 0.1 * v).abs()).sum::<f64>()
}

pub fn ackley(x: &[f64]) -> f64 {
    let d = x.len() as f64;
    let sq: f64 = x.iter().map(|v| v * v).sum();
    let cs: f64 = x.iter().map(|v| (2.0 * PI * v).cos()).sum();
    20.0 * (-0.2 * (sq / d).sqrt()).exp() + (cs / d).exp() - 20.0 - E
}

pub fn shekel5(x: &[f64]) -> f64 {
    SHEKEL_C
        .iter()
        .zip(SHEKEL_B)
        .map(|(c, b)| 1.0 / (x.iter().zip(c).map(|(v, ci)| (v - ci) * (v - ci)).sum::<f64>() + b))
        .sum()
}

impl Synthetic {
    pub const ALL: [Synthetic; 4] = [Synthetic::Dropwave, Synthetic::Alpine1, Synthetic::Ackley, Synthetic::Shekel5];

    pub fn name(self) -> &'static str {
        match self {
            Synthetic::Dropwave => "dropwave",
            Synthetic::Alpine1 => "alpine1",
            Synthetic::Ackley => "ackley",
            Synthetic::Shekel5 => "shekel5",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Synthetic::Dropwave => 2,
            Synthetic::Alpine1 | Synthetic::Ackley => 3,
            Synthetic::Shekel5 => 4,
        }
    }

    pub fn bounds(self) -> (f64, f64) {
        match self {
            Synthetic::Dropwave => (-5.12, 5.12),
            Synthetic::Alpine1 => (-10.0, 10.0),
            Synthetic::Ackley => (-1.0, 1.0),
            Synthetic::Shekel5 => (0.0, 10.0),
        }
    }

    pub fn known_max(self) -> f64 {
        match self {
            Synthetic::Dropwave => 1.0,
            Synthetic::Alpine1 | Synthetic::Ackley => 0.0,
            Synthetic::Shekel5 => SHEKEL5_MAX,
        }
    }

    pub fn known_argmax(self) -> Vec<f64> {
        match self {
            Synthetic::Shekel5 => SHEKEL5_ARGMAX.to_vec(),
            k => vec![0.0; k.dim()],
        }
    }

    pub fn objective(self) -> fn(&[f64]) -> f64 {
        match self {
            Synthetic::Dropwave => dropwave,
            Synthetic::Alpine1 => alpine1,
            Synthetic::Ackley => ackley,
            Synthetic::Shekel5 => shekel5,
        }
    }

    /// The problem with unit cost; see [`ProblemSpec::with_cost_params`].
    pub fn spec(self) -> ProblemSpec {
        let (lo, hi) = self.bounds();
        let f = self.objective();
        ProblemSpec {
            name: self.name().to_string(),
            lower: vec![lo; self.dim()],
            upper: vec![hi; self.dim()],
            objective: Arc::new(f),
            cost: Arc::new(|_| 1.0),
            known_max: Some(self.known_max()),
            known_argmax: Some(self.known_argmax()),
        }
    }
}

impl FromStr for Synthetic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Synthetic::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownProblem(s.to_string()))
    }
}

pub fn make_synthetic(name: &str) -> Result<ProblemSpec, Error> {
    Ok(name.parse::<Synthetic>()?.spec())
}
