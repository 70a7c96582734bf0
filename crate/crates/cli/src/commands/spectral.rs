use liftlab::bounds::{lift_lower_bound, trel_lower_from_sing};
use liftlab::samplers::StreamSource;
use liftlab::spectral::{
    assemble_galerkin, empirical_decay, langevin_gap_m, relaxation_time_on_grid, spectral_analysis, EmpiricalConfig,
    GalerkinProcess,
};
use liftlab::{Error, Process, Provenance, Result, TargetMeasure, TestFunction};
use serde_json::{json, Value};

use crate::config::{SpectralMethod, SpectralPlan};
use crate::report::{cell, Csv, Outcome};

pub fn run(plan: &SpectralPlan, seed: u64) -> Result<Outcome> {
    match (&plan.sweep, plan.method) {
        (Some(gammas), _) => sweep(plan, gammas),
        (None, SpectralMethod::Galerkin) => galerkin(plan),
        (None, SpectralMethod::Empirical) => empirical(plan, seed),
    }
}

/// Relaxation times at `ε ≤ 1/e` are at least `t_rel(1/e)`, so the lower
/// bounds stated for `t_rel(1/e)` apply to them.
fn applies(eps: f64) -> bool {
    eps <= (-1.0f64).exp() * (1.0 + 1e-12)
}

fn galerkin(plan: &SpectralPlan) -> Result<Outcome> {
    let process = plan.galerkin_process();
    let (report, curve) = spectral_analysis(process, &plan.potential, plan.gamma, plan.degree, &plan.grid, &plan.eps)?;
    let base = assemble_galerkin(GalerkinProcess::Overdamped, &plan.potential, 0.0, plan.degree)?;
    // reversible: ‖P_t‖ = e^{-gap t}
    let t_base = 1.0 / base.spectral_gap()?;
    let sing_lower = trel_lower_from_sing(report.sing)?;
    let lift_lower = lift_lower_bound(t_base)?;

    let mut csv = Csv::new(["t", "norm"]);
    for (t, v) in curve.times().iter().zip(curve.values()) {
        csv.push(vec![cell(Some(*t)), cell(Some(*v))]);
    }
    let mut results = serde_json::to_value(&report).expect("report serialises");
    results["base_relaxation_time"] = json!(t_base);
    results["lower_bound_from_sing"] = json!(sing_lower);
    results["lower_bound_from_lift"] = json!(lift_lower);
    let mut outcome = Outcome::new(results, Provenance::Galerkin);
    outcome.converged = report.converged;
    for r in report.relaxation.iter().filter(|r| applies(r.eps)) {
        outcome.check(
            "relaxation time ≥ 1/(2 sing)",
            sing_lower <= r.time + 1e-9,
            format!("eps {:.4}: {sing_lower:.6} ≤ {:.6}", r.eps, r.time),
        );
        if process.is_lift() {
            outcome.check(
                "lift relaxation time ≥ √t_base/(2√2)",
                lift_lower <= r.time + 1e-9,
                format!("eps {:.4}: {lift_lower:.6} ≤ {:.6}", r.eps, r.time),
            );
        }
    }
    outcome.table("", csv);
    Ok(outcome)
}

fn sweep(plan: &SpectralPlan, gammas: &[f64]) -> Result<Outcome> {
    let closed = plan.process == Process::Langevin && plan.potential.dim() == 1;
    let mass = plan.potential.quadratic_mass().filter(|_| closed);
    let mut csv = Csv::new(["gamma", "gap"]);
    let mut points = Vec::with_capacity(gammas.len());
    for &g in gammas {
        let gap = match mass {
            Some(m) => langevin_gap_m(g, m)?,
            None => assemble_galerkin(plan.galerkin_process(), &plan.potential, g, plan.degree)?.spectral_gap()?,
        };
        csv.push(vec![cell(Some(g)), cell(Some(gap))]);
        points.push((g, gap));
    }
    let best = points.iter().copied().max_by(|a, b| a.1.total_cmp(&b.1)).expect("non-empty sweep");
    let provenance = if mass.is_some() { Provenance::Exact } else { Provenance::Galerkin };
    let results = json!({
        "process": plan.process.as_str(),
        "potential": plan.potential.label(),
        "degree": if mass.is_some() { Value::Null } else { json!(plan.degree) },
        "points": points.iter().map(|(g, v)| json!({ "gamma": g, "gap": v })).collect::<Vec<_>>(),
        "argmax_gamma": best.0,
        "max_gap": best.1,
    });
    let mut outcome = Outcome::new(results, provenance);
    outcome.table("", csv);
    Ok(outcome)
}

fn empirical(plan: &SpectralPlan, seed: u64) -> Result<Outcome> {
    let measure = TargetMeasure::phase_space(plan.potential.clone());
    let cfg = EmpiricalConfig {
        outer: plan.outer,
        inner: plan.inner,
        step: plan.step,
        source: StreamSource::default_for(&measure),
        seed,
    };
    let f = TestFunction::coordinate(plan.potential.dim(), 0);
    let curve = empirical_decay(plan.process, &plan.potential, plan.gamma, &f, &plan.grid, &cfg)?;
    let se = curve.std_errors().map(<[f64]>::to_vec).unwrap_or_default();
    let mut csv = Csv::new(["t", "norm", "se"]);
    for (i, (t, v)) in curve.times().iter().zip(curve.values()).enumerate() {
        csv.push(vec![cell(Some(*t)), cell(Some(*v)), cell(se.get(i).copied())]);
    }
    let mut times = Vec::new();
    for &eps in &plan.eps {
        match relaxation_time_on_grid(&curve, eps) {
            Ok(r) => times.push(serde_json::to_value(r).expect("serialises")),
            Err(Error::NoCrossing { last, .. }) => times.push(json!({ "eps": eps, "time": null, "last": last })),
            Err(e) => return Err(e),
        }
    }
    let results = json!({
        "process": plan.process.as_str(),
        "potential": plan.potential.label(),
        "gamma": plan.gamma,
        "observable": f.to_string(),
        "outer": plan.outer,
        "inner": plan.inner,
        "relaxation": times,
        "note": "lower bound on the operator-norm curve from a single observable",
    });
    let mut outcome = Outcome::new(results, Provenance::MonteCarlo);
    outcome.table("", csv);
    Ok(outcome)
}
