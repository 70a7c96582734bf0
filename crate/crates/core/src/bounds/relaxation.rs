//! Relaxation-time bounds and optimality constants.

use std::f64::consts::SQRT_2;

use crate::{Error, Result};

fn positive(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, "must be positive and finite"))
    }
}

/// `T + 2√(C0 C1) log(1/ε)`.
pub fn trel_upper_bound(t: f64, c0: f64, c1: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid("eps", "must lie in (0, 1)"));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid("T", "must be non-negative"));
    }
    positive("C0", c0)?;
    positive("C1", c1)?;
    Ok(t + 2.0 * (c0 * c1).sqrt() * (1.0 / eps).ln())
}

/// `1 / (2 sing)`.
pub fn trel_lower_from_sing(sing: f64) -> Result<f64> {
    positive("sing", sing)?;
    Ok(0.5 / sing)
}

/// `√t_base / (2√2)`, the smallest relaxation time any lift can reach.
pub fn lift_lower_bound(t_rel_base: f64) -> Result<f64> {
    positive("t_rel_base", t_rel_base)?;
    Ok(t_rel_base.sqrt() / (2.0 * SQRT_2))
}

/// Smallest `C` with `t_lift ≤ C √t_base / (2√2)`.
pub fn optimality_constant(t_rel_lift: f64, t_rel_base: f64) -> Result<f64> {
    positive("t_rel_lift", t_rel_lift)?;
    Ok(t_rel_lift / lift_lower_bound(t_rel_base)?)
}

/// Certified optimality constant of RHMC on potentials with `κ₋ ≤ c m`:
/// `2√2 (2024 √(1 + c/7) + 3)` at the optimal refresh rate, or
/// `2√2 (482 (6 + 5c/7) A + 3)` for any `γ/√m ∈ [1/A, A]`.
pub fn corollary_optimality(c: f64, a: Option<f64>) -> Result<f64> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::invalid("c", "must be non-negative"));
    }
    match a {
        None => Ok(2.0 * SQRT_2 * (2024.0 * (1.0 + c / 7.0).sqrt() + 3.0)),
        Some(a) if a >= 1.0 && a.is_finite() => Ok(2.0 * SQRT_2 * (482.0 * (6.0 + 5.0 * c / 7.0) * a + 3.0)),
        Some(_) => Err(Error::invalid("A", "must be at least 1")),
    }
}

/// The `A` of [`corollary_optimality`] realised by a refresh rate: `max(γ/√m, √m/γ)`.
pub fn refresh_spread(gamma: f64, m: f64) -> Result<f64> {
    positive("gamma", gamma)?;
    positive("m", m)?;
    let r = gamma / m.sqrt();
    Ok(r.max(1.0 / r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::constants::{rhmc_optimal_gamma, StpiConstants};
    use crate::spectral::{gaussian_propagator_norm, relaxation_time, uniform_grid, DecayCurve};
    use crate::Provenance;

    #[test]
    fn upper_bound_examples() {
        let s = StpiConstants::new(482.0, 6373.0 / 3.0).unwrap();
        let e1 = (-1.0f64).exp();
        let u = trel_upper_bound(3.0, s.c0, s.c1, e1).unwrap();
        assert!((u - 2026.787).abs() < 1e-3);
        let near_one = trel_upper_bound(3.0, s.c0, s.c1, 1.0 - 1e-12).unwrap();
        assert!((near_one - 3.0).abs() < 1e-6);
        let u2 = trel_upper_bound(3.0, s.c0, s.c1, (-2.0f64).exp()).unwrap();
        assert!((u2 - 3.0 - 2.0 * (u - 3.0)).abs() < 1e-9);
        assert!(trel_upper_bound(3.0, 1.0, 1.0, 1.0).is_err());
        assert!(trel_upper_bound(3.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn sing_lower_bound_examples() {
        assert_eq!(trel_lower_from_sing(0.5).unwrap(), 1.0);
        assert_eq!(trel_lower_from_sing(1.0).unwrap(), 0.5);
        let c = 0.37;
        assert!((trel_lower_from_sing(2.0 * c).unwrap() - trel_lower_from_sing(c).unwrap() / 2.0).abs() < 1e-15);
        assert!(trel_lower_from_sing(0.0).is_err());
    }

    #[test]
    fn lift_lower_bound_examples() {
        assert!((lift_lower_bound(2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((lift_lower_bound(8.0).unwrap() - 1.0).abs() < 1e-15);
        for m in [0.25, 2.0, 9.0] {
            let ratio = lift_lower_bound(2.0 / m).unwrap() / lift_lower_bound(2.0).unwrap();
            assert!((ratio - m.powf(-0.5)).abs() < 1e-14);
        }
        assert!(lift_lower_bound(-1.0).is_err());
    }

    #[test]
    fn optimality_examples() {
        assert!((optimality_constant(2.73, 2.0).unwrap() - 5.46).abs() < 1e-12);
        let lb = lift_lower_bound(3.3).unwrap();
        assert!((optimality_constant(lb, 3.3).unwrap() - 1.0).abs() < 1e-14);
        // both relaxation times rescaled by the Gaussian scaling law
        for m in [0.5f64, 4.0] {
            let c = optimality_constant(2.7 / m.sqrt(), 2.0 / m).unwrap();
            assert!((c - optimality_constant(2.7, 2.0).unwrap()).abs() < 1e-12);
        }
        assert!(optimality_constant(0.0, 1.0).is_err());
    }

    #[test]
    fn corollary_examples() {
        let c0 = corollary_optimality(0.0, None).unwrap();
        assert!((c0 - 2.0 * SQRT_2 * 2027.0).abs() < 1e-9);
        assert!((c0 - 5733.22).abs() < 0.01);
        let ca = corollary_optimality(0.0, Some(1.0)).unwrap();
        assert!((ca - 2.0 * SQRT_2 * 2895.0).abs() < 1e-9);
        assert!((ca - 8188.30).abs() < 0.01);
        let c7 = corollary_optimality(7.0, None).unwrap();
        assert!((c7 - 2.0 * SQRT_2 * (2024.0 * SQRT_2 + 3.0)).abs() < 1e-9);
        assert!(corollary_optimality(-1.0, None).is_err());
        assert!(corollary_optimality(0.0, Some(0.5)).is_err());
    }

    #[test]
    fn refresh_spread_is_symmetric() {
        assert_eq!(refresh_spread(2.0, 1.0).unwrap(), 2.0);
        assert_eq!(refresh_spread(0.5, 1.0).unwrap(), 2.0);
        assert_eq!(refresh_spread(2.0, 4.0).unwrap(), 1.0);
    }

    #[test]
    fn ordering_chain_for_critical_langevin() {
        let grid = uniform_grid(0.0, 8.0, 0.01).unwrap();
        let norm = |t| gaussian_propagator_norm(2.0, t);
        let curve = DecayCurve::from_fn(&grid, Provenance::Exact, norm).unwrap();
        let t_lift = relaxation_time(&curve, (-1.0f64).exp(), norm).unwrap().time;
        // sing = 1 for the standard Gaussian Langevin generator
        assert!(trel_lower_from_sing(1.0).unwrap() <= t_lift);
        assert!(lift_lower_bound(2.0).unwrap() <= t_lift);
        let r = rhmc_optimal_gamma(1.0, 0.0).unwrap();
        let s = StpiConstants::new(482.0, 6373.0 / 3.0).unwrap();
        let upper = trel_upper_bound(r.t, s.c0, s.c1, (-1.0f64).exp()).unwrap();
        assert!(t_lift <= upper);
    }
}
