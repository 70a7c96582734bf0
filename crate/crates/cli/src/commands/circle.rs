use liftlab::samplers::circle_chains;
use liftlab::spectral::{tv_mixing_time, MixingTime, DEFAULT_MIXING_CAP};
use liftlab::stats::ols_slope;
use liftlab::{Provenance, Result};
use serde_json::{json, Value};

use crate::config::CirclePlan;
use crate::report::{cell, Csv, Outcome};

/// Mixing times of the base and lifted walks for each `n`.
pub(crate) struct CircleRow {
    pub n: usize,
    pub eps: f64,
    pub base: MixingTime,
    pub lift: MixingTime,
}

pub(crate) fn mixing_rows(plan: &CirclePlan) -> Result<Vec<CircleRow>> {
    plan.ns
        .iter()
        .map(|&n| {
            let eps = plan.eps_rule.at(n);
            let (p, q) = circle_chains(n, eps)?;
            let base = tv_mixing_time(&p, &vec![1.0 / n as f64; n], plan.tol, DEFAULT_MIXING_CAP)?;
            let lift = tv_mixing_time(&q, &vec![0.5 / n as f64; 2 * n], plan.tol, DEFAULT_MIXING_CAP)?;
            Ok(CircleRow { n, eps, base, lift })
        })
        .collect()
}

/// Log-log slope of mixing time against `n` over the rows that mixed.
pub(crate) fn slope(rows: &[CircleRow], pick: impl Fn(&CircleRow) -> MixingTime) -> Option<f64> {
    let (x, y): (Vec<f64>, Vec<f64>) =
        rows.iter().filter_map(|r| pick(r).steps().map(|s| ((r.n as f64).ln(), (s as f64).ln()))).unzip();
    (x.len() >= 2).then(|| ols_slope(&x, &y))
}

pub(crate) fn outcome_for(rows: &[CircleRow], tol: f64) -> Outcome {
    let mut csv = Csv::new(["n", "eps", "base_steps", "lift_steps"]);
    let mut items = Vec::new();
    for r in rows {
        let steps = |m: MixingTime| m.steps().map(|s| s as f64);
        csv.push(vec![r.n.to_string(), cell(Some(r.eps)), cell(steps(r.base)), cell(steps(r.lift))]);
        items.push(json!({ "n": r.n, "eps": r.eps, "base": r.base, "lift": r.lift }));
    }
    let results = json!({
        "tol": tol,
        "rows": items,
        "base_slope": slope(rows, |r| r.base).map_or(Value::Null, Value::from),
        "lift_slope": slope(rows, |r| r.lift).map_or(Value::Null, Value::from),
    });
    let mut outcome = Outcome::new(results, Provenance::Exact);
    outcome.table("", csv);
    outcome
}

pub fn run(plan: &CirclePlan) -> Result<Outcome> {
    Ok(outcome_for(&mixing_rows(plan)?, plan.tol))
}
