//! Budgeted multi-step lookahead on a one-shot scenario tree.
//!
//! The nested expectations and maximizations of the lookahead are replaced
//! by a fixed tree of fantasy scenarios: each node owns its own decision
//! point, all points are optimized jointly, and the fantasy draws come from a
//! fixed [`BaseSampleSheet`] so the objective is deterministic and smooth.

mod eval;
mod layout;
mod schedule;

pub use eval::{bmsei_value_and_grad, evaluate_tree, TreeEval};
pub use layout::{BaseSampleSheet, BudgetSource, FantasyBudget, Node, TreeLayout, TreeVariables};
pub use schedule::{fantasy_budget, ROLLOUT_STARTS};
