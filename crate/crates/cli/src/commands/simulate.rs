use liftlab::samplers::simulate;
use liftlab::{ChainConfig, Provenance, Result};
use serde_json::json;

use crate::config::SimulatePlan;
use crate::report::{cell, Csv, Outcome};

pub fn run(plan: &SimulatePlan, seed: u64) -> Result<Outcome> {
    let config = ChainConfig { step: plan.step, gamma: plan.gamma, horizon: plan.horizon, seed, chains: plan.chains };
    let chains = simulate(plan.process, &plan.potential, &plan.init, &config, plan.record_every)?;
    let d = plan.potential.dim();
    let lifted = plan.process.is_lift();
    let mut header: Vec<String> = vec!["t".into()];
    header.extend((1..=d).map(|i| format!("x{i}")));
    if lifted {
        header.extend((1..=d).map(|i| format!("v{i}")));
    }
    header.push("event".into());

    let mut summaries = Vec::new();
    let mut tables = Vec::new();
    for (c, rows) in chains.iter().enumerate() {
        let mut csv = Csv::new(header.clone());
        let (mut bounces, mut refreshes) = (0usize, 0usize);
        let mut sum = vec![0.0; d];
        let mut recorded = 0usize;
        for r in rows {
            let mut line = vec![cell(Some(r.t))];
            line.extend(r.x.iter().map(|&x| cell(Some(x))));
            if lifted {
                line.extend((0..d).map(|i| cell(r.v.get(i).copied())));
            }
            line.push(r.event.map_or("", |e| e.as_str()).to_string());
            csv.push(line);
            match r.event {
                Some(liftlab::EventKind::Bounce) => bounces += 1,
                Some(_) => refreshes += 1,
                None => {
                    recorded += 1;
                    for (s, x) in sum.iter_mut().zip(&r.x) {
                        *s += x;
                    }
                }
            }
        }
        let last = rows.iter().rev().find(|r| r.event.is_none()).expect("initial row is recorded");
        summaries.push(json!({
            "chain": c,
            "rows": rows.len(),
            "bounces": bounces,
            "refreshes": refreshes,
            "final_x": last.x,
            "final_v": last.v,
            "mean_x": sum.iter().map(|s| s / recorded as f64).collect::<Vec<_>>(),
        }));
        let suffix = if plan.chains == 1 { String::new() } else { format!("chain{c}") };
        tables.push((suffix, csv));
    }
    let results = json!({
        "process": plan.process.as_str(),
        "potential": plan.potential.label(),
        "gamma": plan.gamma,
        "horizon": plan.horizon,
        "step": plan.step,
        "record_every": plan.record_every,
        "chains": summaries,
    });
    let mut outcome = Outcome::new(results, Provenance::MonteCarlo);
    for (suffix, csv) in tables {
        outcome.table(&suffix, csv);
    }
    Ok(outcome)
}
