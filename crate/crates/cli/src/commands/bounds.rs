use liftlab::bounds::{
    bounds_report, certify_delayed_contractivity, divergence_constants_exact, estimate_poincare, rational_from_f64,
    recommended_constants_exact, rhmc_optimal_gamma, BoundsInput, BoundsReport, ExactDivergence,
};
use liftlab::spectral::{assemble_galerkin, uniform_grid, GalerkinProcess, TRUNCATION_TOLERANCE};
use liftlab::{Error, Potential, Provenance, Result, Tagged};
use serde_json::{json, Value};

use super::galerkin_relaxation;
use crate::config::BoundsPlan;
use crate::report::{cell, Csv, Outcome};

/// Exact constants as strings such as `1591/3`, when the inputs are
/// decimal rationals and the rational branch of `c1` applies.
pub(crate) fn exact_block(input: &BoundsInput, t: f64) -> Value {
    let exact = (|| -> Option<std::result::Result<ExactDivergence, Error>> {
        let m = rational_from_f64(input.m.value)?;
        let k = rational_from_f64(input.kappa_minus)?;
        Some(match input.t {
            None => recommended_constants_exact(m, k),
            Some(_) => divergence_constants_exact(rational_from_f64(t * t)?, m, k),
        })
    })();
    match exact {
        Some(Ok(c)) => {
            let s = c.stpi();
            json!({ "c0": c.c0.to_string(), "c1": c.c1.to_string(), "C0": s.c0.to_string(), "C1": s.c1.to_string() })
        }
        Some(Err(e)) => json!({ "unavailable": e.to_string() }),
        None => json!({ "unavailable": "inputs are not short decimal rationals" }),
    }
}

struct Measured {
    t_base: f64,
    t_lift: f64,
    sing: f64,
    certificate: Value,
    certified: bool,
    converged: bool,
}

/// Relaxation times of the overdamped diffusion and of RHMC at the
/// report's `(γ, ν, T)`, plus the delayed-contractivity certificate.
fn measure(pot: &Potential, degree: usize, draft: &BoundsReport) -> Result<Measured> {
    let base = assemble_galerkin(GalerkinProcess::Overdamped, pot, 0.0, degree)?;
    let lift = assemble_galerkin(GalerkinProcess::Rhmc, pot, draft.gamma.value, degree)?;
    let t_lift = galerkin_relaxation(&lift, (-1.0f64).exp())?.time;
    let horizon = (50.0f64).max(4.0 * t_lift).max(2.0 * draft.delay.value);
    let grid = uniform_grid(0.0, horizon, horizon / 500.0)?;
    let (certificate, certified, converged) =
        match certify_delayed_contractivity(&lift, draft.nu.value, draft.delay.value, &grid, TRUNCATION_TOLERANCE) {
            Ok(c) => (serde_json::to_value(c).expect("serialises"), c.passed, true),
            Err(Error::NotConverged { change, .. }) => (json!({ "not_converged": change }), true, false),
            Err(e) => return Err(e),
        };
    Ok(Measured {
        t_base: 1.0 / base.spectral_gap()?,
        t_lift,
        sing: lift.singular_value_gap(),
        certificate,
        certified,
        converged,
    })
}

pub fn run(plan: &BoundsPlan) -> Result<Outcome> {
    let mut input = plan.input;
    let mut potential_label = Value::Null;
    if let Some(pot) = &plan.potential {
        input.m = estimate_poincare(pot, plan.degree)?;
        input.kappa_minus = pot.kappa_minus();
        potential_label = json!(pot.label());
    }
    let draft = bounds_report(&input)?;
    let measured = match &plan.potential {
        Some(pot) => Some(measure(pot, plan.degree, &draft)?),
        None => None,
    };
    if let Some(m) = &measured {
        input.sing = Some(Tagged::new(m.sing, Provenance::Galerkin));
        input.t_rel_base = Some(Tagged::new(m.t_base, input.m.provenance.combine(Provenance::Galerkin)));
        input.t_rel_lift = Some(Tagged::new(m.t_lift, Provenance::Galerkin));
    }
    let report = bounds_report(&input)?;
    let t = report.delay.value;
    let tuning = (input.t.is_none() && input.gamma.is_none())
        .then(|| rhmc_optimal_gamma(input.m.value, input.kappa_minus))
        .transpose()?;

    let mut results = json!({
        "potential": potential_label,
        "report": report,
        "exact": exact_block(&input, t),
        "rhmc_tuning": tuning,
    });
    let provenance = input.m.provenance;
    let mut csv = Csv::new(["quantity", "value", "provenance"]);
    let rows: Vec<(&str, Option<Tagged>)> = vec![
        ("m", Some(report.m)),
        ("kappa_minus", Some(report.kappa_minus)),
        ("T", Some(report.delay)),
        ("c0", Some(report.divergence_c0)),
        ("c1", Some(report.divergence_c1)),
        ("C0", Some(report.stpi_c0)),
        ("C1", Some(report.stpi_c1)),
        ("gamma", Some(report.gamma)),
        ("nu", Some(report.nu)),
        ("trel_upper", Some(report.trel_upper)),
        ("trel_lower_from_sing", report.trel_lower_from_sing),
        ("trel_lower_from_lift", report.trel_lower_from_lift),
        ("measured_trel", report.measured_trel),
        ("optimality_achieved", report.optimality_achieved),
        ("corollary_constant", Some(report.corollary_constant)),
        ("corollary_constant_a", Some(report.corollary_constant_a)),
    ];
    for (name, v) in rows.into_iter().filter_map(|(n, v)| v.map(|v| (n, v))) {
        csv.push(vec![name.to_string(), cell(Some(v.value)), v.provenance.to_string()]);
    }
    let mut outcome = Outcome::new(Value::Null, provenance);
    if let Some(tuning) = &tuning {
        outcome.check(
            "1/ν below the stated bound",
            tuning.within_bound,
            format!("{:.4} < {:.4}", tuning.inverse_rate, tuning.bound),
        );
    }
    if let Some(m) = measured {
        results["certificate"] = m.certificate;
        outcome.converged = m.converged;
        let upper = report.trel_upper.value;
        outcome.check(
            "lower bounds ≤ measured relaxation time",
            report.ordering_holds == Some(true),
            format!(
                "sing bound {:.6}, lift bound {:.6}, measured {:.6}",
                report.trel_lower_from_sing.map_or(f64::NAN, |x| x.value),
                report.trel_lower_from_lift.map_or(f64::NAN, |x| x.value),
                m.t_lift
            ),
        );
        outcome.check(
            "measured relaxation time ≤ upper bound",
            m.t_lift <= upper,
            format!("{:.6} ≤ {upper:.4}", m.t_lift),
        );
        outcome.check("delayed contractivity", m.certified, "‖exp(tG)‖ ≤ e^{-ν(t-T)} + 1e-3 on the grid");
    }
    outcome.results = results;
    outcome.table("", csv);
    Ok(outcome)
}
