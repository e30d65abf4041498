//! Budget-constrained Bayesian optimization with unknown, heterogeneous
//! evaluation costs.
//!
//! The crate is organized bottom-up:
//!
//! - [`gp`]: Matérn 5/2 Gaussian-process regression with MAP hyperparameters
//!   and exact conditioning on fantasy observations.
//! - [`surrogate`]: the observation set plus independent objective and
//!   log-cost models.
//! - [`acquisition`]: closed-form one-step acquisitions (EI, EI-PUC,
//!   EI-PUC-CC and the budgeted one-step value).
//! - [`tree`]: the budgeted multi-step lookahead acquisition evaluated on a
//!   one-shot scenario tree, and the fantasy-budget scheduler.
//! - [`optim`]: box-constrained local search and multi-start acquisition
//!   maximization.
//! - [`problems`]: synthetic benchmarks, the parametric cost family, the
//!   discrete counterexample instances and a tabular problem loader.
//! - [`theorem1`]: Monte-Carlo policy simulation over the discrete
//!   counterexample instances.
//! - [`harness`]: the budgeted optimization loop, replications and CSV output.

// Negated comparisons are used deliberately so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acquisition;
pub mod dual;
pub mod error;
pub mod gp;
pub mod harness;
pub mod optim;
pub mod problems;
pub mod rng;
pub mod sobol;
pub mod stats;
pub mod surrogate;
pub mod theorem1;
pub mod tree;

pub use acquisition::{AcqEval, BudgetState};
pub use error::{Error, Result};
pub use gp::{GpModel, KernelParams, PosteriorSummary, PriorConfig};
pub use harness::{AcqKind, RegretTrace, RunConfig};
pub use optim::OptimizerConfig;
pub use problems::{CostFamilyParams, DiscreteInstance, ProblemSpec};
pub use surrogate::{Dataset, Observation, SurrogatePair};
pub use tree::{BaseSampleSheet, FantasyBudget, TreeLayout, TreeVariables};
