use liftlab::liftcheck::{run_dictionary, LiftCheckConfig, DEFAULT_K};
use liftlab::{Result, TargetMeasure};

use crate::config::LiftcheckPlan;
use crate::report::{cell, Csv, Outcome};

pub fn run(plan: &LiftcheckPlan, seed: u64) -> Result<Outcome> {
    let config = LiftCheckConfig { samples: plan.samples, chains: plan.chains, seed, k: DEFAULT_K, source: None };
    let measure = TargetMeasure::phase_space(plan.potential.clone());
    let report = run_dictionary(plan.process, &measure, plan.degree, &config)?;
    let mut csv =
        Csv::new(["f", "g", "first_order", "first_order_se", "second_order", "second_order_se", "dirichlet", "passed"]);
    for e in &report.entries {
        csv.push(vec![
            e.f.clone(),
            e.g.clone(),
            cell(Some(e.first_order.value)),
            cell(Some(e.first_order.se)),
            cell(Some(e.second_order.value)),
            cell(Some(e.second_order.se)),
            cell(Some(e.dirichlet)),
            e.passed().to_string(),
        ]);
    }
    let failed = report.entries.iter().filter(|e| !e.passed()).count();
    let detail = format!(
        "{} of {} pairs within {} standard errors",
        report.entries.len() - failed,
        report.entries.len(),
        report.k
    );
    let passed = report.passed;
    let provenance = report.provenance;
    let mut outcome = Outcome::new(serde_json::to_value(&report).expect("report serialises"), provenance);
    outcome.check("lift identities", passed, detail);
    outcome.table("", csv);
    Ok(outcome)
}
