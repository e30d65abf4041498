use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::Result;
use crate::stats::ci95_half_width;

use super::run::{log_regret, RegretTrace};

/// Mean log-regret across replications at one budget level.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub budget: f64,
    pub mean_log_regret: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_reps: usize,
}

/// `n` equally spaced budgets from `0.2 B` to `B`.
pub fn budget_grid(budget: f64, n: usize) -> Vec<f64> {
    let lo = 0.2 * budget;
    if n == 1 {
        return vec![budget];
    }
    (0..n).map(|i| lo + (budget - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Aggregate traces as step functions of cumulative cost. Traces with no
/// affordable evaluation at a grid budget, or without a known maximum, are
/// left out of that grid point.
pub fn aggregate(traces: &[RegretTrace], grid: &[f64]) -> Vec<AggregateRow> {
    grid.iter()
        .map(|&b| {
            let vals: Vec<f64> = traces
                .iter()
                .filter_map(|t| t.best_at(b).and_then(|best| log_regret(t.known_max, best)))
                .collect();
            let n = vals.len();
            let mean = if n == 0 { f64::NAN } else { vals.iter().sum::<f64>() / n as f64 };
            let hw = ci95_half_width(&vals);
            AggregateRow { budget: b, mean_log_regret: mean, ci_low: mean - hw, ci_high: mean + hw, n_reps: n }
        })
        .collect()
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn traces_csv(traces: &[RegretTrace]) -> String {
    let mut out =
        String::from("rep,eval_index,excluded_flag,cumulative_cost,y,z,best_value,log_regret,wallclock_seconds\n");
    for t in traces {
        for r in &t.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                t.replication,
                r.index,
                u8::from(r.excluded),
                num(r.cumulative_cost),
                num(r.y),
                num(r.z),
                num(r.best_value),
                r.log_regret.map_or_else(|| "nan".to_string(), num),
                num(r.wallclock_seconds)
            );
        }
    }
    out
}

pub fn aggregate_csv(rows: &[AggregateRow]) -> String {
    let mut out = String::from("budget,mean_log_regret,ci_low,ci_high,n_reps\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            num(r.budget),
            num(r.mean_log_regret),
            num(r.ci_low),
            num(r.ci_high),
            r.n_reps
        );
    }
    out
}

/// Write `traces.csv` and `aggregate.csv` (100-point grid) into `dir`.
pub fn write_outputs(dir: &Path, traces: &[RegretTrace], budget: f64) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("traces.csv"), traces_csv(traces))?;
    fs::write(dir.join("aggregate.csv"), aggregate_csv(&aggregate(traces, &budget_grid(budget, 100))))?;
    Ok(())
}
