use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Shape of a scenario tree: `lookahead_steps` stages and a branching factor
/// for every stage but the last.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeLayout {
    lookahead_steps: usize,
    branching: Vec<usize>,
    nodes: Vec<Node>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub parent: Option<usize>,
    pub depth: usize,
    /// Index of the first child; children are contiguous.
    pub first_child: usize,
    pub n_children: usize,
    /// Position among the parent's children.
    pub child_index: usize,
}

impl TreeLayout {
    pub fn new(lookahead_steps: usize, branching: Vec<usize>) -> Result<Self> {
        if lookahead_steps == 0 {
            return Err(Error::Config("lookahead must be at least one step".into()));
        }
        if branching.len() != lookahead_steps - 1 || branching.contains(&0) {
            return Err(Error::Config(format!(
                "{lookahead_steps}-step tree needs {} positive branching factors, got {branching:?}",
                lookahead_steps - 1
            )));
        }
        // Breadth-first numbering.
        let mut nodes = vec![Node { parent: None, depth: 0, first_child: 0, n_children: 0, child_index: 0 }];
        let mut level = 0..1;
        for (depth, &m) in branching.iter().enumerate() {
            let start = nodes.len();
            for p in level.clone() {
                nodes[p].first_child = nodes.len();
                nodes[p].n_children = m;
                for c in 0..m {
                    nodes.push(Node {
                        parent: Some(p),
                        depth: depth + 1,
                        first_child: 0,
                        n_children: 0,
                        child_index: c,
                    });
                }
            }
            level = start..nodes.len();
        }
        Ok(Self { lookahead_steps, branching, nodes })
    }

    /// Degenerate tree with one fantasy per stage.
    pub fn path(lookahead_steps: usize) -> Result<Self> {
        Self::new(lookahead_steps, vec![1; lookahead_steps.saturating_sub(1)])
    }

    /// Default branching: `N = 2 → (4)`, `N = 3 → (4, 2)`, `N = 4 → (4, 2, 1)`,
    /// `N = 5 → (4, 2, 2, 1)`; deeper trees append ones.
    pub fn default_for(lookahead_steps: usize) -> Result<Self> {
        let branching = match lookahead_steps {
            0 => return Err(Error::Config("lookahead must be at least one step".into())),
            1 => vec![],
            2 => vec![4],
            3 => vec![4, 2],
            4 => vec![4, 2, 1],
            n => {
                let mut b = vec![4, 2, 2, 1];
                b.resize(n - 1, 1);
                b
            }
        };
        Self::new(lookahead_steps, branching)
    }

    pub fn lookahead_steps(&self) -> usize {
        self.lookahead_steps
    }

    pub fn branching(&self) -> &[usize] {
        &self.branching
    }

    pub fn is_path(&self) -> bool {
        self.branching.iter().all(|&m| m == 1)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Nodes from the root down to `node`, inclusive.
    pub fn path_to(&self, node: usize) -> Vec<usize> {
        let mut p = vec![node];
        let mut cur = node;
        while let Some(parent) = self.nodes[cur].parent {
            p.push(parent);
            cur = parent;
        }
        p.reverse();
        p
    }

    /// Product of `1/m` over the stages above `node`.
    pub fn weight(&self, node: usize) -> f64 {
        self.path_to(node)[1..]
            .iter()
            .map(|&u| 1.0 / self.nodes[self.nodes[u].parent.unwrap()].n_children as f64)
            .product()
    }

    /// Child of `node` at position `c`, if present.
    pub fn child(&self, node: usize, c: usize) -> Option<usize> {
        let n = &self.nodes[node];
        (c < n.n_children).then(|| n.first_child + c)
    }
}

/// One decision point per tree node, in the layout's node order.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeVariables {
    pub points: Vec<Vec<f64>>,
}

impl TreeVariables {
    pub fn root(&self) -> &[f64] {
        &self.points[0]
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.points.concat()
    }

    pub fn from_flat(flat: &[f64], dim: usize) -> Self {
        Self { points: flat.chunks(dim).map(<[f64]>::to_vec).collect() }
    }

    /// Every node at the same point.
    pub fn replicated(x: &[f64], layout: &TreeLayout) -> Self {
        Self { points: vec![x.to_vec(); layout.node_count()] }
    }

    pub fn check(&self, layout: &TreeLayout, dim: usize) -> Result<()> {
        if self.points.len() != layout.node_count() {
            return Err(Error::DimensionMismatch { expected: layout.node_count(), got: self.points.len() });
        }
        if let Some(p) = self.points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
        }
        Ok(())
    }
}

/// Standard-normal base draws `(eps_y, eps_lnz)` per tree node. The draw of
/// node `u` generates the fantasy observation made at its parent's point; the
/// root entry is unused.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseSampleSheet {
    pub eps: Vec<(f64, f64)>,
}

impl BaseSampleSheet {
    pub fn draw<R: Rng + ?Sized>(layout: &TreeLayout, rng: &mut R) -> Self {
        Self {
            eps: (0..layout.node_count())
                .map(|_| (rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect(),
        }
    }

    pub fn zeros(layout: &TreeLayout) -> Self {
        Self { eps: vec![(0.0, 0.0); layout.node_count()] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetSource {
    /// Cumulative cost of the base-policy rollout, below the true remaining.
    RolloutCapped,
    /// The true remaining budget was the smaller of the two.
    TrueRemaining,
}

/// Budget handed to the tree in place of the true remaining budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FantasyBudget {
    pub amount: f64,
    pub source: BudgetSource,
}

impl FantasyBudget {
    pub fn true_remaining(amount: f64) -> Self {
        Self { amount, source: BudgetSource::TrueRemaining }
    }
}
