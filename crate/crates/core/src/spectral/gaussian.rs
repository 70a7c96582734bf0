//! Closed forms for the kinetic Langevin dynamics on a Gaussian target.
//!
//! On `L₀²(μ̂)` for `μ = N(0, 1/m)` the propagator norm equals the norm of
//! the 2x2 matrix `exp(-tA)` acting on the degree-one sector, with
//! `A = [[0, -√m], [√m, γ]]` in the orthonormal coordinates `(√m x, v)`.

use nalgebra::DMatrix;

use crate::linalg::{expm, spectral_norm};
use crate::{Error, Result};

/// Drift matrix of the degree-one sector in orthonormal coordinates.
///
/// For `m = 1` this is `[[0, -1], [1, γ]]`. For general `m` it is congruent
/// to `[[0, -1], [m, γ]]` (same spectrum) but, unlike that matrix, its
/// Euclidean operator norm is the `L²(μ̂)` norm.
pub fn gaussian_drift(gamma: f64, m: f64) -> DMatrix<f64> {
    let r = m.sqrt();
    DMatrix::from_row_slice(2, 2, &[0.0, -r, r, gamma])
}

/// `‖exp(-tA)‖` for `m = 1`.
pub fn gaussian_propagator_norm(gamma: f64, t: f64) -> Result<f64> {
    gaussian_propagator_norm_m(gamma, 1.0, t)
}

/// `‖P̂_t‖` on `L₀²(μ̂)` for the Gaussian target with precision `m`.
pub fn gaussian_propagator_norm_m(gamma: f64, m: f64, t: f64) -> Result<f64> {
    if !(m > 0.0) {
        return Err(Error::invalid("m", "must be positive"));
    }
    if !(gamma >= 0.0) {
        return Err(Error::invalid("gamma", "must be non-negative"));
    }
    if !(t >= 0.0) {
        return Err(Error::invalid("t", "must be non-negative"));
    }
    Ok(spectral_norm(&expm(&(gaussian_drift(gamma, m) * -t))?))
}

/// Closed form at critical damping `γ = 2`, `m = 1`:
/// `√(1 + 2t² + 2t√(1 + t²)) e^{-t}`.
pub fn critical_closed_form(t: f64) -> f64 {
    (1.0 + 2.0 * t * t + 2.0 * t * (1.0 + t * t).sqrt()).sqrt() * (-t).exp()
}

/// Spectral gap of Langevin dynamics on the standard Gaussian:
/// `γ/2` for `γ ≤ 2`, `(γ - √(γ² - 4))/2` beyond.
pub fn langevin_gap(gamma: f64) -> f64 {
    if gamma <= 2.0 {
        gamma / 2.0
    } else {
        // rationalised to avoid cancellation for large γ
        2.0 / (gamma + (gamma * gamma - 4.0).sqrt())
    }
}

/// Gap for precision `m`: `√m · langevin_gap(γ/√m)`.
pub fn langevin_gap_m(gamma: f64, m: f64) -> Result<f64> {
    if !(m > 0.0) {
        return Err(Error::invalid("m", "must be positive"));
    }
    Ok(m.sqrt() * langevin_gap(gamma / m.sqrt()))
}

/// Relaxation time at precision `m` from the one at `m = 1` (with `γ`
/// scaled as `γ√m`): `t_rel / √m`.
pub fn scale_relaxation(t_rel: f64, m: f64) -> Result<f64> {
    if !(m > 0.0) {
        return Err(Error::invalid("m", "must be positive"));
    }
    Ok(t_rel / m.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigenvalues;

    #[test]
    fn identity_at_time_zero() {
        for g in [0.0, 0.5, 2.0, 7.0] {
            assert!((gaussian_propagator_norm(g, 0.0).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn critical_norm_matches_closed_form() {
        let e1 = (-1.0f64).exp() * (1.0 + 2f64.sqrt());
        assert!((critical_closed_form(1.0) - e1).abs() < 1e-15);
        let mut worst: f64 = 0.0;
        for i in 0..=600 {
            let t = i as f64 * 0.01;
            worst = worst.max((gaussian_propagator_norm(2.0, t).unwrap() - critical_closed_form(t)).abs());
        }
        assert!(worst < 1e-12, "{worst}");
        assert!(gaussian_propagator_norm(2.0, 2.73).unwrap() <= (-1.0f64).exp());
    }

    #[test]
    fn gap_values() {
        assert_eq!(langevin_gap(2.0), 1.0);
        assert_eq!(langevin_gap(1.0), 0.5);
        assert!((langevin_gap(4.0) - (2.0 - 3f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn gap_is_minus_largest_real_eigenvalue() {
        for g in [0.1, 0.5, 1.0, 1.9, 2.0, 2.1, 4.0, 6.0] {
            let min_re =
                eigenvalues(&gaussian_drift(g, 1.0)).unwrap().iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
            assert!((min_re - langevin_gap(g)).abs() < 1e-12, "γ={g}");
        }
    }

    #[test]
    fn congruent_drift_has_same_spectrum() {
        let (g, m) = (1.3, 4.0);
        let mut a = eigenvalues(&gaussian_drift(g, m)).unwrap();
        let mut b = eigenvalues(&DMatrix::from_row_slice(2, 2, &[0.0, -1.0, m, g])).unwrap();
        a.sort_by(|p, q| p.1.total_cmp(&q.1));
        b.sort_by(|p, q| p.1.total_cmp(&q.1));
        for (p, q) in a.iter().zip(&b) {
            assert!((p.0 - q.0).abs() < 1e-12 && (p.1 - q.1).abs() < 1e-12);
        }
        assert!((langevin_gap_m(g, m).unwrap() - a[0].0).abs() < 1e-12);
    }

    #[test]
    fn norm_scaling_in_m() {
        // ‖P̂_t^{(m)}‖ with γ = 2√m equals ‖P̂_{√m t}‖ at m = 1.
        for m in [0.25f64, 4.0, 9.0] {
            for t in [0.3, 1.0, 2.5] {
                let lhs = gaussian_propagator_norm_m(2.0 * m.sqrt(), m, t).unwrap();
                let rhs = gaussian_propagator_norm(2.0, m.sqrt() * t).unwrap();
                assert!((lhs - rhs).abs() < 1e-12);
            }
        }
        assert_eq!(scale_relaxation(2.7, 1.0).unwrap(), 2.7);
        assert_eq!(scale_relaxation(2.7, 4.0).unwrap(), 1.35);
        assert_eq!(scale_relaxation(2.7, 0.25).unwrap(), 5.4);
        assert!(scale_relaxation(1.0, 0.0).is_err());
    }
}
