use liftlab::bounds::{
    corollary_optimality, frac, lift_lower_bound, optimality_constant, rational_from_f64, recommended_constants_exact,
    rhmc_optimal_gamma,
};
use liftlab::spectral::{
    assemble_galerkin, critical_closed_form, gaussian_propagator_norm, langevin_gap, relaxation_time, uniform_grid,
    DecayCurve, GalerkinProcess, MixingTime,
};
use liftlab::{Potential, Provenance, Result};
use serde_json::json;

use super::circle::{mixing_rows, outcome_for, slope};
use super::galerkin_relaxation;
use crate::config::{CirclePlan, EpsRule, Target};
use crate::report::{cell, Csv, Outcome};

pub fn run(target: Target) -> Result<Outcome> {
    let mut outcome = match target {
        Target::Fig1 => fig1()?,
        Target::GaussianTrel => gaussian_trel()?,
        Target::CircleScaling => circle_scaling()?,
        Target::ConstantsTable => constants_table()?,
        Target::Optimality => optimality()?,
    };
    outcome.results["target"] = json!(target.as_str());
    Ok(outcome)
}

fn fig1() -> Result<Outcome> {
    let gammas = uniform_grid(0.1, 6.0, 0.05)?;
    let gaps: Vec<f64> = gammas.iter().map(|&g| langevin_gap(g)).collect();
    let mut csv = Csv::new(["gamma", "gap"]);
    for (g, v) in gammas.iter().zip(&gaps) {
        csv.push(vec![cell(Some(*g)), cell(Some(*v))]);
    }
    let (imax, &best) = gaps.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty");
    let at = gammas[imax];
    let up = gaps[..=imax].windows(2).all(|w| w[0] < w[1]);
    let down = gaps[imax..].windows(2).all(|w| w[0] > w[1]);
    let mut outcome =
        Outcome::new(json!({ "argmax_gamma": at, "max_gap": best, "points": gammas.len() }), Provenance::Exact);
    outcome.check(
        "gap maximal at critical damping",
        (at - 2.0).abs() < 1e-9 && (best - 1.0).abs() <= 1e-6,
        format!("max {best:.9} at γ = {at:.4}"),
    );
    outcome.check("gap increasing then decreasing", up && down, format!("increasing {up}, decreasing {down}"));
    outcome.table("", csv);
    Ok(outcome)
}

fn gaussian_trel() -> Result<Outcome> {
    let norm = |t| gaussian_propagator_norm(2.0, t);
    let grid = uniform_grid(0.0, 6.0, 0.01)?;
    let curve = DecayCurve::from_fn(&grid, Provenance::Exact, norm)?;
    let t_rel = relaxation_time(&curve, (-1.0f64).exp(), norm)?.time;
    let mut csv = Csv::new(["t", "norm", "closed_form"]);
    for (t, v) in curve.times().iter().zip(curve.values()) {
        csv.push(vec![cell(Some(*t)), cell(Some(*v)), cell(Some(critical_closed_form(*t)))]);
    }
    let pass = t_rel <= 2.73;
    let verdict = format!("≤ 2.73: {}", if pass { "pass" } else { "fail" });
    let results = json!({
        "gamma": 2.0,
        "eps": (-1.0f64).exp(),
        "t_rel": t_rel,
        "verdict": verdict,
        "optimality_constant": optimality_constant(t_rel, 2.0)?,
    });
    let mut outcome = Outcome::new(results, Provenance::Exact);
    outcome.check("critical Langevin relaxation time", pass, format!("t_rel = {t_rel:.7}"));
    outcome.table("", csv);
    Ok(outcome)
}

fn circle_scaling() -> Result<Outcome> {
    let plan = CirclePlan { ns: vec![9, 17, 33, 65], eps_rule: EpsRule::InverseN, tol: 0.25 };
    let rows = mixing_rows(&plan)?;
    let mut outcome = outcome_for(&rows, plan.tol);
    let sb = slope(&rows, |r| r.base).unwrap_or(f64::NAN);
    let sl = slope(&rows, |r| r.lift).unwrap_or(f64::NAN);
    let periodic = mixing_rows(&CirclePlan { ns: vec![4], ..plan })?;
    let flagged = matches!(periodic[0].base, MixingTime::NoMixing { .. });
    outcome.results["n4_base_mixes"] = json!(!flagged);
    outcome.check("base walk mixes in Θ(n²)", (sb - 2.0).abs() <= 0.3, format!("slope {sb:.3}"));
    outcome.check("lifted walk mixes in Θ(n)", (sl - 1.0).abs() <= 0.3, format!("slope {sl:.3}"));
    outcome.check("periodic base walk never mixes", flagged, "n = 4");
    Ok(outcome)
}

fn constants_table() -> Result<Outcome> {
    let mut csv = Csv::new(["m", "kappa_minus", "T", "c0", "c1", "C0", "C1", "gamma", "inverse_rate", "bound"]);
    let mut rows = Vec::new();
    let mut exact_ok = true;
    let mut bound_ok = true;
    for m in [0.25, 1.0, 4.0] {
        for k in [0.0, 1.0, 7.0] {
            let (mq, kq) = (rational_from_f64(m).expect("decimal"), rational_from_f64(k).expect("decimal"));
            let c = recommended_constants_exact(mq, kq)?;
            let s = c.stpi();
            exact_ok &= c.c0 == frac(241, 1) / mq && c.c1 == frac(1591, 3) + frac(75, 1) * kq / mq;
            let r = rhmc_optimal_gamma(m, k)?;
            bound_ok &= r.within_bound;
            csv.push(vec![
                cell(Some(m)),
                cell(Some(k)),
                cell(Some(r.t)),
                c.c0.to_string(),
                c.c1.to_string(),
                s.c0.to_string(),
                s.c1.to_string(),
                cell(Some(r.gamma)),
                cell(Some(r.inverse_rate)),
                cell(Some(r.bound)),
            ]);
            rows.push(json!({
                "m": m, "kappa_minus": k, "T": r.t,
                "c0": c.c0.to_string(), "c1": c.c1.to_string(), "C0": s.c0.to_string(), "C1": s.c1.to_string(),
                "gamma": r.gamma, "inverse_rate": r.inverse_rate, "bound": r.bound,
            }));
        }
    }
    let mut outcome = Outcome::new(json!({ "rows": rows }), Provenance::Exact);
    outcome.check("c0 = 241/m and c1 = 530⅓ + 75κ₋/m exactly", exact_ok, "exact rational arithmetic");
    outcome.check("1/ν < (2024/√m)√(1 + κ₋/(7m))", bound_ok, "all rows");
    outcome.table("", csv);
    Ok(outcome)
}

fn optimality() -> Result<Outcome> {
    let pot = Potential::quadratic(1.0, 1)?;
    let eps = (-1.0f64).exp();
    let t_base = 2.0;
    let lower = lift_lower_bound(t_base)?;
    let certified = corollary_optimality(0.0, None)?;
    let tuning = rhmc_optimal_gamma(1.0, 0.0)?;
    let mut csv = Csv::new(["process", "gamma", "t_rel", "C"]);
    let mut rows = Vec::new();
    let mut ok_lower = true;
    let mut rhmc_c = f64::NAN;
    for (process, gamma) in [
        (GalerkinProcess::Langevin, 1.0),
        (GalerkinProcess::Langevin, 2.0),
        (GalerkinProcess::Langevin, 4.0),
        (GalerkinProcess::Rhmc, 1.0),
        (GalerkinProcess::Rhmc, tuning.gamma),
    ] {
        let g = assemble_galerkin(process, &pot, gamma, 16)?;
        let t = galerkin_relaxation(&g, eps)?.time;
        let c = optimality_constant(t, t_base)?;
        ok_lower &= t >= lower;
        if process == GalerkinProcess::Rhmc && gamma == tuning.gamma {
            rhmc_c = c;
        }
        csv.push(vec![process.as_str().to_string(), cell(Some(gamma)), cell(Some(t)), cell(Some(c))]);
        rows.push(json!({ "process": process.as_str(), "gamma": gamma, "t_rel": t, "C": c }));
    }
    let results = json!({
        "t_rel_base": t_base,
        "lift_lower_bound": lower,
        "rows": rows,
        "certified_constant": certified,
        "certified_constant_a1": corollary_optimality(0.0, Some(1.0))?,
    });
    let mut outcome = Outcome::new(results, Provenance::Galerkin);
    outcome.check("every lift above √t_base/(2√2)", ok_lower, format!("lower bound {lower:.4}"));
    outcome.check(
        "certified constant ≥ achieved RHMC constant",
        certified >= rhmc_c,
        format!("{certified:.2} ≥ {rhmc_c:.4}"),
    );
    outcome.table("", csv);
    Ok(outcome)
}
