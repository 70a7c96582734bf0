//! Hypocoercivity constants, relaxation-time bounds and optimality certificates.

mod constants;
mod relaxation;
mod sandwich;

pub use constants::{
    contraction_rate, divergence_constants, divergence_constants_exact, frac, rational_from_f64,
    recommended_constants_exact, rhmc_contraction_rate, rhmc_optimal_gamma, stpi_constants, DivergenceConstants,
    ExactDivergence, ExactStpi, Rational, RhmcTuning, StpiConstants,
};
pub use relaxation::{
    corollary_optimality, lift_lower_bound, optimality_constant, refresh_spread, trel_lower_from_sing, trel_upper_bound,
};
pub use sandwich::{certify_curve, certify_delayed_contractivity, sandwich_t0, Certificate, Sandwich, DELAY_GRID};

use serde::{Deserialize, Serialize};

use crate::model::Potential;
use crate::spectral::{assemble_galerkin, GalerkinProcess};
use crate::{Error, Provenance, Result, Tagged};

/// Poincaré constant from the overdamped Galerkin gap: the generator
/// `½Δ - ½∇U·∇` has gap `m/2`, so `m = 2 · gap`.
pub fn estimate_poincare(pot: &Potential, degree: usize) -> Result<Tagged> {
    if let Some(p) = pot.poincare_constant() {
        let prov = if p.estimated { Provenance::Estimated } else { Provenance::Exact };
        return Ok(Tagged::new(p.value, prov));
    }
    let g = assemble_galerkin(GalerkinProcess::Overdamped, pot, 0.0, degree)?;
    Ok(Tagged::new(2.0 * g.spectral_gap()?, Provenance::Estimated))
}

/// Inputs of [`bounds_report`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsInput {
    pub m: Tagged,
    pub kappa_minus: f64,
    /// Delay `T`; `None` picks `3/√m`.
    pub t: Option<f64>,
    /// Refresh rate; `None` picks `√(C1/C0)`.
    pub gamma: Option<f64>,
    pub eps: f64,
    /// Measured singular value gap of the lift, if available.
    pub sing: Option<Tagged>,
    /// Measured relaxation times of the base diffusion and of the lift.
    pub t_rel_base: Option<Tagged>,
    pub t_rel_lift: Option<Tagged>,
}

impl BoundsInput {
    pub fn new(m: f64, kappa_minus: f64, eps: f64) -> Self {
        Self {
            m: Tagged::exact(m),
            kappa_minus,
            t: None,
            gamma: None,
            eps,
            sing: None,
            t_rel_base: None,
            t_rel_lift: None,
        }
    }
}

/// Constants, rates, relaxation-time bounds and optimality constants for
/// one `(m, κ₋, T, γ)`. Every number carries its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub m: Tagged,
    pub kappa_minus: Tagged,
    pub delay: Tagged,
    pub divergence_c0: Tagged,
    pub divergence_c1: Tagged,
    pub stpi_c0: Tagged,
    pub stpi_c1: Tagged,
    pub gamma: Tagged,
    pub gamma_is_optimal: bool,
    pub nu: Tagged,
    pub eps: f64,
    pub trel_upper: Tagged,
    pub trel_lower_from_sing: Option<Tagged>,
    pub trel_lower_from_lift: Option<Tagged>,
    pub measured_trel: Option<Tagged>,
    pub optimality_achieved: Option<Tagged>,
    /// Every lower bound lies below the measured relaxation time.
    pub ordering_holds: Option<bool>,
    /// `c = κ₋/m`, `A = max(γ/√m, √m/γ)`.
    pub corollary_c: f64,
    pub corollary_a: f64,
    pub corollary_constant: Tagged,
    pub corollary_constant_a: Tagged,
}

pub fn bounds_report(input: &BoundsInput) -> Result<BoundsReport> {
    let m = input.m.value;
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::invalid("m", "must be positive"));
    }
    let t = input.t.unwrap_or(3.0 / m.sqrt());
    let div = divergence_constants(t, m, input.kappa_minus)?;
    let stpi = stpi_constants(&div);
    let gamma = input.gamma.unwrap_or_else(|| stpi.optimal_gamma());
    let nu = contraction_rate(gamma, &stpi)?;
    if !(input.eps > 0.0 && input.eps < 1.0) {
        return Err(Error::invalid("eps", "must lie in (0, 1)"));
    }
    let c = input.kappa_minus / m;
    let a = refresh_spread(gamma, m)?;

    let base = input.m.provenance;
    let tag = |v: f64| Tagged::new(v, base);
    let lower_sing =
        input.sing.map(|s| trel_lower_from_sing(s.value).map(|v| Tagged::new(v, s.provenance))).transpose()?;
    let lower_lift =
        input.t_rel_base.map(|s| lift_lower_bound(s.value).map(|v| Tagged::new(v, s.provenance))).transpose()?;
    let achieved = match (input.t_rel_lift, input.t_rel_base) {
        (Some(l), Some(b)) => {
            Some(Tagged::new(optimality_constant(l.value, b.value)?, l.provenance.combine(b.provenance)))
        }
        _ => None,
    };
    let ordering = input.t_rel_lift.map(|l| [lower_sing, lower_lift].into_iter().flatten().all(|b| b.value <= l.value));
    let gamma_optimal = (gamma - stpi.optimal_gamma()).abs() <= 1e-12 * gamma;
    // equals trel_upper_bound at the optimal γ
    let upper = t + (1.0 / input.eps).ln() / nu;
    let report = BoundsReport {
        m: input.m,
        kappa_minus: Tagged::exact(input.kappa_minus),
        delay: Tagged::exact(t),
        divergence_c0: tag(div.c0),
        divergence_c1: tag(div.c1),
        stpi_c0: tag(stpi.c0),
        stpi_c1: tag(stpi.c1),
        gamma: tag(gamma),
        gamma_is_optimal: gamma_optimal,
        nu: tag(nu),
        eps: input.eps,
        trel_upper: tag(upper),
        trel_lower_from_sing: lower_sing,
        trel_lower_from_lift: lower_lift,
        measured_trel: input.t_rel_lift,
        optimality_achieved: achieved,
        ordering_holds: ordering,
        corollary_c: c,
        corollary_a: a,
        corollary_constant: tag(corollary_optimality(c, None)?),
        corollary_constant_a: tag(corollary_optimality(c, Some(a))?),
    };
    report.validate()?;
    Ok(report)
}

impl BoundsReport {
    /// `ν > 0`, all entries finite, and every lower bound below the upper one.
    pub fn validate(&self) -> Result<()> {
        let mut all = vec![
            self.m,
            self.kappa_minus,
            self.delay,
            self.divergence_c0,
            self.divergence_c1,
            self.stpi_c0,
            self.stpi_c1,
            self.gamma,
            self.nu,
            self.trel_upper,
            self.corollary_constant,
            self.corollary_constant_a,
        ];
        all.extend(
            [self.trel_lower_from_sing, self.trel_lower_from_lift, self.measured_trel, self.optimality_achieved]
                .into_iter()
                .flatten(),
        );
        if all.iter().any(|x| !x.value.is_finite()) {
            return Err(Error::NonFinite("bounds report entry".into()));
        }
        if !(self.nu.value > 0.0) {
            return Err(Error::invalid("nu", "must be positive"));
        }
        for lower in [self.trel_lower_from_sing, self.trel_lower_from_lift].into_iter().flatten() {
            if lower.value > self.trel_upper.value {
                return Err(Error::invalid(
                    "bounds",
                    format!("lower bound {} exceeds upper bound {}", lower.value, self.trel_upper.value),
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_report_at_the_recommended_window() {
        let r = bounds_report(&BoundsInput::new(1.0, 0.0, (-1.0f64).exp())).unwrap();
        assert_eq!(r.delay.value, 3.0);
        assert!((r.stpi_c0.value - 482.0).abs() < 1e-12);
        assert!((r.gamma.value - 2.0993643).abs() < 1e-6);
        assert!(r.gamma_is_optimal);
        assert!((1.0 / r.nu.value - 2023.787).abs() < 1e-3);
        let direct = trel_upper_bound(3.0, r.stpi_c0.value, r.stpi_c1.value, r.eps).unwrap();
        assert!((r.trel_upper.value - direct).abs() < 1e-9);
        assert!((r.corollary_a - 2.0993643).abs() < 1e-6);
        assert!(r.corollary_constant_a.value > r.corollary_constant.value);
        assert!(Provenance::ALL.contains(&r.nu.provenance));
        assert_eq!(r.nu.provenance, Provenance::Exact);
        assert!(r.ordering_holds.is_none());
    }

    #[test]
    fn measured_inputs_fill_the_lower_bounds() {
        let mut input = BoundsInput::new(1.0, 0.0, (-1.0f64).exp());
        input.sing = Some(Tagged::new(1.0, Provenance::Galerkin));
        input.t_rel_base = Some(Tagged::exact(2.0));
        input.t_rel_lift = Some(Tagged::new(2.73, Provenance::Galerkin));
        let r = bounds_report(&input).unwrap();
        assert_eq!(r.trel_lower_from_sing.unwrap().value, 0.5);
        assert!((r.trel_lower_from_lift.unwrap().value - 0.5).abs() < 1e-15);
        assert!((r.optimality_achieved.unwrap().value - 5.46).abs() < 1e-12);
        assert_eq!(r.optimality_achieved.unwrap().provenance, Provenance::Galerkin);
        assert_eq!(r.ordering_holds, Some(true));
        assert!(r.corollary_constant.value >= r.optimality_achieved.unwrap().value);
    }

    #[test]
    fn explicit_gamma_and_delay() {
        let mut input = BoundsInput::new(1.0, 0.0, 0.1);
        input.t = Some(1.0);
        input.gamma = Some(1.0);
        let r = bounds_report(&input).unwrap();
        assert!(!r.gamma_is_optimal);
        assert_eq!(r.nu.value, 1.0 / (178.0 + 8599.0));
        assert!(bounds_report(&BoundsInput { gamma: Some(-1.0), ..input }).is_err());
        assert!(bounds_report(&BoundsInput { eps: 1.0, ..input }).is_err());
    }

    #[test]
    fn double_well_uses_an_estimated_poincare_constant() {
        let pot = Potential::double_well(0.5).unwrap();
        let m = estimate_poincare(&pot, 24).unwrap();
        assert_eq!(m.provenance, Provenance::Estimated);
        assert!(m.value > 0.0 && m.value < 2.0);
        let mut input = BoundsInput::new(1.0, pot.kappa_minus(), (-1.0f64).exp());
        input.m = m;
        let r = bounds_report(&input).unwrap();
        assert_eq!(r.nu.provenance, Provenance::Estimated);
        assert_eq!(r.kappa_minus.value, 2.0);
        let gauss = estimate_poincare(&Potential::quadratic(1.0, 1).unwrap(), 8).unwrap();
        assert_eq!(gauss, Tagged::exact(1.0));
    }

    #[test]
    fn report_round_trips_through_json() {
        let r = bounds_report(&BoundsInput::new(2.0, 1.0, 0.2)).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"provenance\":\"exact\""));
        let back: BoundsReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
