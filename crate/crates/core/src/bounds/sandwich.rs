//! Delayed contractivity: the `t0` sandwich and a Galerkin certificate.

use serde::{Deserialize, Serialize};

use crate::spectral::{operator_norm_decay, relaxation_time, DecayCurve, GeneratorMatrix, CROSSING_PRECISION};
use crate::{Error, Result};

/// Number of delays `T` tried on `[0, 2 t_rel]`.
pub const DELAY_GRID: usize = 400;

/// `t_rel(ε) ≤ t0(ε) ≤ 2 t_rel(ε)` evaluated on a curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub eps: f64,
    pub t_rel: f64,
    /// `min over T of log(1/ε)/ν(T) + T`.
    pub t0: f64,
    /// Minimising rate and delay.
    pub nu: f64,
    pub delay: f64,
    /// Both inequalities hold up to [`CROSSING_PRECISION`].
    pub holds: bool,
}

/// Largest `ν` with `curve(t) ≤ e^{-ν(t - T)}` at every grid point `t > T`
/// and at the crossing `(t_rel, ε)`. `None` when no positive rate works.
fn max_rate(times: &[f64], values: &[f64], delay: f64, crossing: (f64, f64)) -> Option<f64> {
    let points = times.iter().zip(values).map(|(&t, &v)| (t, v)).chain(std::iter::once(crossing));
    let mut nu = f64::INFINITY;
    for (t, v) in points {
        if t <= delay || v == 0.0 {
            continue;
        }
        nu = nu.min(-v.ln() / (t - delay));
    }
    (nu > 0.0).then_some(nu)
}

/// Locate `t_rel(ε)` by bisection on `norm` and approximate `t0(ε)` by a
/// grid search over the delay.
pub fn sandwich_t0(curve: &DecayCurve, eps: f64, norm: impl Fn(f64) -> Result<f64>) -> Result<Sandwich> {
    let rel = relaxation_time(curve, eps, norm)?;
    let t_rel = rel.time;
    let log_eps = (1.0 / eps).ln();
    let mut best: Option<(f64, f64, f64)> = None;
    let delays = (0..DELAY_GRID).map(|i| 2.0 * t_rel * i as f64 / (DELAY_GRID - 1) as f64).chain([t_rel]);
    for delay in delays {
        let Some(nu) = max_rate(curve.times(), curve.values(), delay, (t_rel, eps)) else {
            continue;
        };
        let t0 = if log_eps == 0.0 { delay } else { log_eps / nu + delay };
        if best.is_none_or(|(b, _, _)| t0 < b) {
            best = Some((t0, nu, delay));
        }
    }
    let (t0, nu, delay) = best.ok_or(Error::NoFeasibleContraction)?;
    let holds = t_rel <= t0 + CROSSING_PRECISION && t0 <= 2.0 * t_rel + CROSSING_PRECISION;
    Ok(Sandwich { eps, t_rel, t0, nu, delay, holds })
}

/// Outcome of checking `‖exp(tG)‖ ≤ e^{-ν(t - T)} + tol` on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub nu: f64,
    pub delay: f64,
    pub tolerance: f64,
    /// Largest `‖exp(tG)‖ - e^{-ν(t - T)}` over the grid and where it occurs.
    pub worst_excess: f64,
    pub worst_time: f64,
    /// Largest `‖exp(tG)‖ e^{ν(t - T)}`.
    pub worst_ratio: f64,
    /// Change of the curve against truncation `D + 4`.
    pub truncation_change: f64,
    pub passed: bool,
}

/// Check the delayed bound on `grid` (which must start at 0). A Galerkin
/// matrix whose curve moves under refinement is refused.
pub fn certify_delayed_contractivity(
    g: &GeneratorMatrix,
    nu: f64,
    delay: f64,
    grid: &[f64],
    tolerance: f64,
) -> Result<Certificate> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::invalid("nu", "must be positive"));
    }
    if !(delay >= 0.0 && delay.is_finite()) {
        return Err(Error::invalid("T", "must be non-negative"));
    }
    let curve = operator_norm_decay(g, grid)?;
    let change = curve.truncation_change().unwrap_or(0.0);
    if !curve.is_converged() {
        return Err(Error::NotConverged { degree: g.degree(), next: g.degree() + 4, change });
    }
    certify_curve(&curve, nu, delay, tolerance).map(|mut c| {
        c.truncation_change = change;
        c
    })
}

/// The same check on an arbitrary curve.
pub fn certify_curve(curve: &DecayCurve, nu: f64, delay: f64, tolerance: f64) -> Result<Certificate> {
    if !(tolerance >= 0.0) {
        return Err(Error::invalid("tolerance", "must be non-negative"));
    }
    let (mut worst_excess, mut worst_time, mut worst_ratio) = (f64::NEG_INFINITY, 0.0, 0.0f64);
    for (&t, &v) in curve.times().iter().zip(curve.values()) {
        let majorant = (-nu * (t - delay)).exp();
        worst_ratio = worst_ratio.max(v / majorant);
        let excess = v - majorant;
        if excess > worst_excess {
            worst_excess = excess;
            worst_time = t;
        }
    }
    Ok(Certificate {
        nu,
        delay,
        tolerance,
        worst_excess,
        worst_time,
        worst_ratio,
        truncation_change: curve.truncation_change().unwrap_or(0.0),
        passed: worst_excess <= tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Potential;
    use crate::spectral::{assemble_galerkin, gaussian_propagator_norm, uniform_grid, GalerkinProcess};
    use crate::Provenance;

    fn critical_curve() -> (DecayCurve, impl Fn(f64) -> Result<f64>) {
        let norm = |t| gaussian_propagator_norm(2.0, t);
        let grid = uniform_grid(0.0, 12.0, 0.01).unwrap();
        (DecayCurve::from_fn(&grid, Provenance::Exact, norm).unwrap(), norm)
    }

    #[test]
    fn critical_langevin_sandwich() {
        let (curve, norm) = critical_curve();
        for eps in [0.5, (-1.0f64).exp(), 0.1] {
            let s = sandwich_t0(&curve, eps, &norm).unwrap();
            assert!(s.holds, "{s:?}");
        }
        let s = sandwich_t0(&curve, (-1.0f64).exp(), norm).unwrap();
        assert!((s.t_rel - 2.7291169).abs() < 1e-5);
        assert!(s.t0 <= 5.4592);
    }

    #[test]
    fn exponential_curve_has_t0_equal_to_t_rel() {
        let norm = |t: f64| Ok((-0.5 * t).exp());
        let grid = uniform_grid(0.0, 20.0, 0.05).unwrap();
        let curve = DecayCurve::from_fn(&grid, Provenance::Exact, norm).unwrap();
        let s = sandwich_t0(&curve, (-1.0f64).exp(), norm).unwrap();
        assert!((s.t_rel - 2.0).abs() < 1e-6);
        assert!((s.t0 - 2.0).abs() < 1e-6, "{s:?}");
        assert_eq!(s.delay, 0.0);
        assert!((s.nu - 0.5).abs() < 1e-12);
    }

    #[test]
    fn eps_one_gives_zero() {
        let (curve, norm) = critical_curve();
        let s = sandwich_t0(&curve, 1.0, norm).unwrap();
        assert_eq!((s.t_rel, s.t0), (0.0, 0.0));
        assert!(s.holds);
    }

    #[test]
    fn flat_curve_is_infeasible() {
        let curve = DecayCurve::new(vec![0.0, 1.0, 2.0], vec![1.0, 0.2, 1.0], Provenance::Estimated).unwrap();
        let r = sandwich_t0(&curve, 0.5, |t| Ok(if t < 0.5 { 1.0 } else { 0.2 }));
        assert!(matches!(r, Err(Error::NoFeasibleContraction)));
    }

    #[test]
    fn certificate_examples() {
        let pot = Potential::quadratic(1.0, 1).unwrap();
        let g = assemble_galerkin(GalerkinProcess::Rhmc, &pot, 2.0993643, 12).unwrap();
        let grid = uniform_grid(0.0, 20.0, 0.1).unwrap();
        let ok = certify_delayed_contractivity(&g, 1.0 / 2023.8, 3.0, &grid, 1e-6).unwrap();
        assert!(ok.passed && ok.worst_excess < 0.0, "{ok:?}");
        // away from t = 0 the slack is large
        assert!(ok.worst_time == 0.0 && ok.worst_ratio < 1.0);
        let bad = certify_delayed_contractivity(&g, 10.0, 3.0, &grid, 1e-6).unwrap();
        assert!(!bad.passed);
        // a longer delay only helps
        let mut last = f64::INFINITY;
        for delay in [0.0, 0.5, 1.0, 2.0] {
            let c = certify_delayed_contractivity(&g, 2.0, delay, &grid, 1e-6).unwrap();
            assert!(c.worst_excess <= last + 1e-15);
            last = c.worst_excess;
        }
        assert!(certify_delayed_contractivity(&g, 0.0, 3.0, &grid, 1e-6).is_err());
    }
}
