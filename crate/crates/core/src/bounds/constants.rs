//! Divergence and space-time Poincaré constants, contraction rates.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Exact rationals used for the stated constants.
pub type Rational = Ratio<i128>;

/// `n / d` as a [`Rational`].
pub fn frac(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

/// `(π²)` is bracketed by these rationals (both accurate to 1e-9).
const PI_SQUARED_LOWER: (i128, i128) = (9_869_604_401, 1_000_000_000);
const PI_SQUARED_UPPER: (i128, i128) = (9_869_604_402, 1_000_000_000);

/// The rational with denominator at most 10⁶ that converts back to `x`
/// exactly, if there is one (so `0.25` gives `1/4`, `0.1` gives `1/10`).
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    if !x.is_finite() || x.abs() > 1e12 {
        return None;
    }
    (1..=1_000_000i128).find_map(|d| {
        let n = (x * d as f64).round();
        (n / d as f64 == x).then(|| Rational::new(n as i128, d))
    })
}

fn to_f64(q: Rational) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// `c0(T) = 19T² + 70/m` and
/// `c1(T) = 328 + 75κ₋ max(1/√m, T/π)² + 1821/(mT²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceConstants {
    pub t: f64,
    pub m: f64,
    pub kappa_minus: f64,
    pub c0: f64,
    pub c1: f64,
}

pub fn divergence_constants(t: f64, m: f64, kappa_minus: f64) -> Result<DivergenceConstants> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid("T", "must be positive"));
    }
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::invalid("m", "must be positive"));
    }
    if !(kappa_minus >= 0.0 && kappa_minus.is_finite()) {
        return Err(Error::invalid("kappa_minus", "must be non-negative"));
    }
    let reach = (1.0 / m.sqrt()).max(t / std::f64::consts::PI);
    Ok(DivergenceConstants {
        t,
        m,
        kappa_minus,
        c0: 19.0 * t * t + 70.0 / m,
        c1: 328.0 + 75.0 * kappa_minus * reach * reach + 1821.0 / (m * t * t),
    })
}

/// The same constants in exact arithmetic, parametrised by `T²`.
///
/// Only the branch `T² ≤ π²/m` of the maximum is rational; the other one
/// (and inputs too close to decide) are reported as
/// [`Error::IrrationalBranch`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactDivergence {
    pub t_squared: Rational,
    pub m: Rational,
    pub kappa_minus: Rational,
    pub c0: Rational,
    pub c1: Rational,
}

pub fn divergence_constants_exact(t_squared: Rational, m: Rational, kappa_minus: Rational) -> Result<ExactDivergence> {
    let zero = Rational::from_integer(0);
    if t_squared <= zero {
        return Err(Error::invalid("T", "must be positive"));
    }
    if m <= zero {
        return Err(Error::invalid("m", "must be positive"));
    }
    if kappa_minus < zero {
        return Err(Error::invalid("kappa_minus", "must be non-negative"));
    }
    // max(1/√m, T/π)² = 1/m  ⇔  T² m ≤ π²
    let tm = t_squared * m;
    let reach_sq = if tm < frac(PI_SQUARED_LOWER.0, PI_SQUARED_LOWER.1) {
        m.recip()
    } else if kappa_minus == zero {
        zero
    } else if tm > frac(PI_SQUARED_UPPER.0, PI_SQUARED_UPPER.1) {
        return Err(Error::IrrationalBranch(format!("T² m = {} exceeds π², so c1 involves 1/π²", to_f64(tm))));
    } else {
        return Err(Error::IrrationalBranch("T² m is within 1e-9 of π²".into()));
    };
    Ok(ExactDivergence {
        t_squared,
        m,
        kappa_minus,
        c0: frac(19, 1) * t_squared + frac(70, 1) / m,
        c1: frac(328, 1) + frac(75, 1) * kappa_minus * reach_sq + frac(1821, 1) / (m * t_squared),
    })
}

/// Constants at the recommended window `T = 3/√m`, i.e. `T² = 9/m`:
/// `c0 = 241/m`, `c1 = 530⅓ + 75κ₋/m`.
pub fn recommended_constants_exact(m: Rational, kappa_minus: Rational) -> Result<ExactDivergence> {
    if m <= Rational::from_integer(0) {
        return Err(Error::invalid("m", "must be positive"));
    }
    divergence_constants_exact(frac(9, 1) / m, m, kappa_minus)
}

impl ExactDivergence {
    pub fn stpi(&self) -> ExactStpi {
        ExactStpi { c0: frac(2, 1) * self.c0, c1: frac(3, 1) + frac(4, 1) * self.c1 }
    }

    pub fn to_f64(&self) -> DivergenceConstants {
        DivergenceConstants {
            t: to_f64(self.t_squared).sqrt(),
            m: to_f64(self.m),
            kappa_minus: to_f64(self.kappa_minus),
            c0: to_f64(self.c0),
            c1: to_f64(self.c1),
        }
    }
}

/// Space-time Poincaré constants `(C0, C1) = (2c0, 3 + 4c1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StpiConstants {
    pub c0: f64,
    pub c1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactStpi {
    pub c0: Rational,
    pub c1: Rational,
}

impl ExactStpi {
    pub fn to_f64(&self) -> StpiConstants {
        StpiConstants { c0: to_f64(self.c0), c1: to_f64(self.c1) }
    }
}

pub fn stpi_constants(c: &DivergenceConstants) -> StpiConstants {
    StpiConstants { c0: 2.0 * c.c0, c1: 3.0 + 4.0 * c.c1 }
}

impl StpiConstants {
    pub fn new(c0: f64, c1: f64) -> Result<Self> {
        if !(c0 > 0.0 && c0.is_finite() && c1 > 0.0 && c1.is_finite()) {
            return Err(Error::invalid("C0, C1", "must be positive and finite"));
        }
        Ok(Self { c0, c1 })
    }

    /// `√(C1/C0)`, the refresh rate maximising the contraction rate.
    pub fn optimal_gamma(&self) -> f64 {
        (self.c1 / self.c0).sqrt()
    }

    /// `1/(2√(C0 C1))`, the rate at the optimal refresh rate.
    pub fn optimal_rate(&self) -> f64 {
        1.0 / (2.0 * (self.c0 * self.c1).sqrt())
    }
}

/// `ν = γ / (γ² C0 + C1)`.
pub fn contraction_rate(gamma: f64, c: &StpiConstants) -> Result<f64> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid("gamma", "contraction needs γ > 0"));
    }
    Ok(gamma / (gamma * gamma * c.c0 + c.c1))
}

/// The composed rate `γ / (2c0 γ² + 3 + 4c1)` straight from the divergence constants.
pub fn rhmc_contraction_rate(gamma: f64, c: &DivergenceConstants) -> Result<f64> {
    contraction_rate(gamma, &stpi_constants(c))
}

/// Refresh rate and rate for RHMC at `T = 3/√m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhmcTuning {
    pub m: f64,
    pub kappa_minus: f64,
    pub t: f64,
    /// `√((2124⅓ m + 300κ₋)/482)`
    pub gamma: f64,
    /// `1/ν = 2 · 482γ/m`
    pub inverse_rate: f64,
    /// `(2024/√m) √(1 + κ₋/(7m))`
    pub bound: f64,
    /// `1/ν` lies strictly below `bound`.
    pub within_bound: bool,
}

pub fn rhmc_optimal_gamma(m: f64, kappa_minus: f64) -> Result<RhmcTuning> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::invalid("m", "must be positive"));
    }
    if !(kappa_minus >= 0.0 && kappa_minus.is_finite()) {
        return Err(Error::invalid("kappa_minus", "must be non-negative"));
    }
    let gamma = ((6373.0 / 3.0 * m + 300.0 * kappa_minus) / 482.0).sqrt();
    let inverse_rate = 2.0 * 482.0 * gamma / m;
    let bound = 2024.0 / m.sqrt() * (1.0 + kappa_minus / (7.0 * m)).sqrt();
    Ok(RhmcTuning { m, kappa_minus, t: 3.0 / m.sqrt(), gamma, inverse_rate, bound, within_bound: inverse_rate < bound })
}
