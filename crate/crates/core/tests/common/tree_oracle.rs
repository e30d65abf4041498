//! Straight-line reimplementation of a two-stage scenario tree.

use super::{q1_oracle, DenseModel};
use budgetbo::surrogate::SurrogatePair;
use budgetbo::tree::{BaseSampleSheet, TreeVariables};

/// Two-stage tree with four scenarios, written as a plain loop over dense
/// posteriors.
pub fn two_stage_oracle(pair: &SurrogatePair, vars: &TreeVariables, sheet: &BaseSampleSheet, budget: f64) -> f64 {
    let obj = DenseModel::of(&pair.objective);
    let cost = DenseModel::of(&pair.logcost);
    let root = &vars.points[0];
    let (mo, so) = obj.raw(root);
    let (mc, sc) = cost.raw(root);
    let mut value = q1_oracle(mo, so, pair.utility, mc, sc, budget);
    let (m_int, v_int) = obj.moments(root);
    let (c_int, cv_int) = cost.moments(root);
    let mut sum = 0.0;
    for i in 1..=4 {
        let (ey, ez) = sheet.eps[i];
        let y_int = m_int + v_int.sqrt() * ey;
        let lnz = c_int + cv_int.sqrt() * ez;
        let remaining = budget - lnz.exp();
        if remaining <= 0.0 {
            continue;
        }
        let y_raw = obj.t.shift + obj.t.scale * y_int;
        let obj_i = obj.with(root, y_int);
        let cost_i = cost.with(root, lnz);
        let (m, s) = obj_i.raw(&vars.points[i]);
        let (c, cs) = cost_i.raw(&vars.points[i]);
        sum += q1_oracle(m, s, pair.utility.max(y_raw), c, cs, remaining);
    }
    value += sum / 4.0;
    value
}
