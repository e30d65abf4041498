//! Local search on boxes and multi-start acquisition maximization.

pub mod local;
mod maximize;

pub use local::{fd_gradient, minimize_box, LocalConfig, LocalResult};
pub use maximize::{
    maximize_scalar_acq, maximize_tree, select_starts, FnAcq, OneStepAcq, OptimizerConfig, ScalarAcq,
    WarmStartCache,
};
