//! Value and gradient of the scenario-tree objective.
//!
//! Every node conditions on the fantasies along its root path. Rather than
//! refitting, each node keeps a small Cholesky system over the path points on
//! top of the base posterior, extended by one row per stage. All quantities
//! are dual numbers whose gradient has one `d`-block per path depth.

use crate::acquisition::{ei_partials, prob_cost_fits};
use crate::dual::Dual;
use crate::error::{Error, Result};
use crate::gp::{GpModel, PointFeatures};
use crate::surrogate::SurrogatePair;

use super::{BaseSampleSheet, FantasyBudget, TreeLayout, TreeVariables};

#[derive(Debug, Clone, PartialEq)]
pub struct TreeEval {
    pub value: f64,
    /// Gradient in the flattened node variables, when requested.
    pub gradient: Option<Vec<f64>>,
    /// Nodes whose one-step value was computed (not pruned).
    pub evaluated_nodes: usize,
    /// Fantasy objective value behind each root child.
    pub root_fantasy_y: Vec<f64>,
}

/// Fantasy conditioning system of one model along a root path.
#[derive(Debug, Clone)]
struct PathSystem {
    /// Lower-triangular factor of `K0(F, F) + σ²I` over fantasy points.
    l: Vec<Vec<Dual>>,
    /// `L⁻¹ (y_F − μ0(F))`.
    a: Vec<Dual>,
}

struct Pending {
    sys: [PathSystem; 2],
    incumbent: Dual,
    remaining: Dual,
}

struct Live {
    feats: [PointFeatures; 2],
}

struct Ctx {
    d: usize,
    with_grad: bool,
}

impl Ctx {
    /// Dual with gradient blocks `parts` in a path of `blocks` points.
    fn placed(&self, v: f64, parts: &[(usize, &[f64])], blocks: usize) -> Dual {
        if !self.with_grad {
            return Dual::constant(v);
        }
        let d = self.d;
        let mut g = vec![0.0; d * blocks];
        for (b, gr) in parts {
            for (o, gi) in g[b * d..(b + 1) * d].iter_mut().zip(gr.iter()) {
                *o += gi;
            }
        }
        Dual::new(v, g)
    }
}

fn dot(a: &[Dual], b: &[Dual]) -> Dual {
    a.iter().zip(b).fold(Dual::constant(0.0), |acc, (x, y)| acc + x * y)
}

/// Posterior mean and variance (internal units) at the last path point given
/// fantasies at all earlier ones; also returns `L⁻¹ c`.
fn model_step(
    ctx: &Ctx,
    model: &GpModel,
    path: &[&PointFeatures],
    sys: &PathSystem,
) -> (Dual, Dual, Vec<Dual>) {
    let k = path.len() - 1;
    let blocks = k + 1;
    let u = path[k];
    let mut b: Vec<Dual> = Vec::with_capacity(k);
    for (j, anc) in path[..k].iter().enumerate() {
        let (val, ga, gb) = model.feature_cov(u, anc);
        let c = ctx.placed(val, &[(k, &ga), (j, &gb)], blocks);
        let s = dot(&sys.l[j][..j], &b);
        b.push((c - s) / &sys.l[j][j]);
    }
    let (kval, ga, gb) = model.feature_cov(u, u);
    let kuu = ctx.placed(kval, &[(k, &ga), (k, &gb)], blocks);
    let mu0 = ctx.placed(u.mean, &[(k, &u.dmean)], blocks);
    let mean = if k == 0 { mu0 } else { mu0 + dot(&b, &sys.a) };
    let var = if k == 0 { kuu } else { kuu - dot(&b, &b) };
    (mean, var, b)
}

fn clamp_sqrt(x: &Dual) -> Dual {
    if x.v > 0.0 {
        x.sqrt()
    } else {
        Dual::constant(0.0)
    }
}

/// Evaluate the tree objective: the weighted sum over non-pruned nodes of the
/// one-step budgeted value, where each node sees the fantasies on its path,
/// an incumbent raised by them and a budget reduced by their costs.
pub fn evaluate_tree(
    pair: &SurrogatePair,
    layout: &TreeLayout,
    vars: &TreeVariables,
    sheet: &BaseSampleSheet,
    budget: &FantasyBudget,
    with_grad: bool,
) -> Result<TreeEval> {
    let d = pair.dim();
    vars.check(layout, d)?;
    if sheet.eps.len() != layout.node_count() {
        return Err(Error::DimensionMismatch { expected: layout.node_count(), got: sheet.eps.len() });
    }
    let ctx = Ctx { d, with_grad };
    let models = [&pair.objective, &pair.logcost];
    let nodes = layout.nodes();
    let n_nodes = nodes.len();

    let mut live: Vec<Option<Live>> = (0..n_nodes).map(|_| None).collect();
    let mut pending: Vec<Option<Pending>> = (0..n_nodes).map(|_| None).collect();
    let empty = PathSystem { l: Vec::new(), a: Vec::new() };
    pending[0] = Some(Pending {
        sys: [empty.clone(), empty],
        incumbent: Dual::constant(pair.utility),
        remaining: Dual::constant(budget.amount),
    });

    let mut value = 0.0;
    let mut gradient = with_grad.then(|| vec![0.0; n_nodes * d]);
    let mut evaluated = 0;
    let mut root_fantasy_y = Vec::new();

    for u in 0..n_nodes {
        let Some(p) = pending[u].take() else { continue };
        evaluated += 1;
        let x = &vars.points[u];
        let feats = [models[0].features(x, with_grad), models[1].features(x, with_grad)];
        let anc = layout.path_to(u);
        let k = anc.len() - 1;

        let mut moments = Vec::with_capacity(2);
        for m in 0..2 {
            let mut path: Vec<&PointFeatures> =
                anc[..k].iter().map(|&a| &live[a].as_ref().expect("ancestor").feats[m]).collect();
            path.push(&feats[m]);
            moments.push(model_step(&ctx, models[m], &path, &p.sys[m]));
        }
        let t = [models[0].transform(), models[1].transform()];
        let sd_int = [clamp_sqrt(&moments[0].1), clamp_sqrt(&moments[1].1)];
        let mean_raw = |m: usize| moments[m].0.scale(t[m].scale) + t[m].shift;
        let (mo, so) = (mean_raw(0), sd_int[0].scale(t[0].scale));
        let (mc, sc) = (mean_raw(1), sd_int[1].scale(t[1].scale));

        // One-step value; matches the scalar acquisition bit for bit.
        let rem = &p.remaining;
        if rem.v > 0.0 {
            let (e, em, es, einc) = ei_partials(mo.v, so.v, p.incumbent.v);
            let (pr, pdr, pdm, pds) = prob_cost_fits(rem.v, mc.v, sc.v);
            let w = layout.weight(u);
            value += w * (e * pr);
            if let Some(g) = gradient.as_mut() {
                let mut local = vec![0.0; (k + 1) * d];
                mo.add_grad_to(pr * em, &mut local);
                so.add_grad_to(pr * es, &mut local);
                p.incumbent.add_grad_to(pr * einc, &mut local);
                mc.add_grad_to(e * pdm, &mut local);
                sc.add_grad_to(e * pds, &mut local);
                rem.add_grad_to(e * pdr / rem.v, &mut local);
                for (j, &a) in anc.iter().enumerate() {
                    for i in 0..d {
                        g[a * d + i] += w * local[j * d + i];
                    }
                }
            }
        }

        // Fantasize at this node's point for each child.
        let node = &nodes[u];
        for c in node.first_child..node.first_child + node.n_children {
            let (ey, ez) = sheet.eps[c];
            let mut sys = [p.sys[0].clone(), p.sys[1].clone()];
            let mut draws = Vec::with_capacity(2);
            for m in 0..2 {
                let (mean, var, b) = &moments[m];
                let obs = models[m].observation_variance();
                let piv = clamp_sqrt(&(var + obs));
                let piv = if piv.v > 0.0 { piv } else { Dual::constant(obs.sqrt()) };
                let eps = if m == 0 { ey } else { ez };
                let noise = sd_int[m].scale(eps);
                let draw_int = mean + &noise;
                let mut row = b.clone();
                row.push(piv.clone());
                sys[m].l.push(row);
                sys[m].a.push(noise / piv);
                draws.push(draw_int.scale(t[m].scale) + t[m].shift);
            }
            let y = &draws[0];
            let z = draws[1].exp();
            if u == 0 {
                root_fantasy_y.push(y.v);
            }
            let remaining = rem - z;
            if remaining.v > 0.0 {
                pending[c] = Some(Pending { sys, incumbent: p.incumbent.max(y), remaining });
            }
        }
        live[u] = Some(Live { feats });
    }

    Ok(TreeEval { value, gradient, evaluated_nodes: evaluated, root_fantasy_y })
}

/// Value and gradient over all node points (flattened in node order).
pub fn bmsei_value_and_grad(
    pair: &SurrogatePair,
    layout: &TreeLayout,
    vars: &TreeVariables,
    sheet: &BaseSampleSheet,
    budget: &FantasyBudget,
) -> Result<(f64, Vec<f64>)> {
    let ev = evaluate_tree(pair, layout, vars, sheet, budget, true)?;
    Ok((ev.value, ev.gradient.expect("requested")))
}
