use serde::{Deserialize, Serialize};

use super::galerkin::GeneratorMatrix;
use crate::{Error, Provenance, Result};

/// Truncation gate: quantities at degrees `D` and `D + 4` must agree this well.
pub const TRUNCATION_TOLERANCE: f64 = 1e-3;

/// Precision of the bisection that refines a grid crossing.
pub const CROSSING_PRECISION: f64 = 1e-6;

/// `start, start + step, …` up to and including `end` (within rounding).
pub fn uniform_grid(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !start.is_finite() || !end.is_finite() || end < start {
        return Err(Error::invalid("grid", "need start ≤ end and a positive step"));
    }
    let n = ((end - start) / step + 1e-9).floor() as usize;
    if n > 10_000_000 {
        return Err(Error::invalid("grid", "too many grid points"));
    }
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

/// Operator norm `‖P_t‖` on `L₀²` sampled on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    times: Vec<f64>,
    values: Vec<f64>,
    /// Standard errors for Monte Carlo curves.
    std_errors: Option<Vec<f64>>,
    provenance: Provenance,
    /// Largest change against the curve at truncation `D + 4`.
    truncation_change: Option<f64>,
}

impl DecayCurve {
    pub fn new(times: Vec<f64>, values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::invalid("curve", "times and values must be non-empty and of equal length"));
        }
        if times[0] < 0.0 || times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("curve", "time grid must be non-negative and strictly increasing"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::NonFinite("decay curve value".into()));
        }
        if times[0] == 0.0 && provenance != Provenance::MonteCarlo && (values[0] - 1.0).abs() > 1e-10 {
            return Err(Error::invalid("curve", format!("norm at t = 0 is {} instead of 1", values[0])));
        }
        Ok(Self { times, values, std_errors: None, provenance, truncation_change: None })
    }

    /// Evaluate `norm` on the grid.
    pub fn from_fn(times: &[f64], provenance: Provenance, norm: impl Fn(f64) -> Result<f64>) -> Result<Self> {
        let values = times.iter().map(|&t| norm(t)).collect::<Result<Vec<_>>>()?;
        Self::new(times.to_vec(), values, provenance)
    }

    pub fn with_std_errors(mut self, se: Vec<f64>) -> Result<Self> {
        if se.len() != self.times.len() {
            return Err(Error::invalid("curve", "one standard error per grid point"));
        }
        self.std_errors = Some(se);
        Ok(self)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn std_errors(&self) -> Option<&[f64]> {
        self.std_errors.as_deref()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn truncation_change(&self) -> Option<f64> {
        self.truncation_change
    }

    /// False only when the truncation gate was evaluated and failed.
    pub fn is_converged(&self) -> bool {
        self.truncation_change.is_none_or(|c| c < TRUNCATION_TOLERANCE)
    }
}

/// `t ↦ ‖exp(tG)‖` on `grid`, with the truncation gate against `D + 4`.
pub fn operator_norm_decay(g: &GeneratorMatrix, grid: &[f64]) -> Result<DecayCurve> {
    if grid.first() != Some(&0.0) {
        return Err(Error::invalid("grid", "must start at 0"));
    }
    let values = g.propagator_norms(grid)?;
    let finer = g.refined(4)?.propagator_norms(grid)?;
    let change = values.iter().zip(&finer).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let mut curve = DecayCurve::new(grid.to_vec(), values, Provenance::Galerkin)?;
    curve.truncation_change = Some(change);
    Ok(curve)
}

/// `ε`-relaxation time located on a curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxationTime {
    pub eps: f64,
    pub time: f64,
    /// The curve stays at or below `ε` on the rest of the grid.
    pub persistent: bool,
}

/// First time the norm drops to `ε`: the first grid crossing, refined by
/// bisection on `norm` to [`CROSSING_PRECISION`]. A later return above `ε`
/// on the grid is reported through `persistent`.
pub fn relaxation_time(curve: &DecayCurve, eps: f64, norm: impl Fn(f64) -> Result<f64>) -> Result<RelaxationTime> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::invalid("eps", "must lie in (0, 1]"));
    }
    let v = curve.values();
    let t = curve.times();
    let k = v.iter().position(|&x| x <= eps).ok_or(Error::NoCrossing { eps, last: *v.last().unwrap_or(&f64::NAN) })?;
    let persistent = v[k..].iter().all(|&x| x <= eps + 1e-12);
    if k == 0 {
        return Ok(RelaxationTime { eps, time: t[0], persistent });
    }
    let (mut lo, mut hi) = (t[k - 1], t[k]);
    while hi - lo > CROSSING_PRECISION / 4.0 {
        let mid = 0.5 * (lo + hi);
        if norm(mid)? <= eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(RelaxationTime { eps, time: hi, persistent })
}

/// Relaxation time read off the grid alone, by linear interpolation
/// between the bracketing points (for curves without a norm function).
pub fn relaxation_time_on_grid(curve: &DecayCurve, eps: f64) -> Result<RelaxationTime> {
    let (t, v) = (curve.times().to_vec(), curve.values().to_vec());
    relaxation_time(curve, eps, |s| {
        let i = t.partition_point(|&x| x <= s).clamp(1, t.len() - 1);
        let w = (s - t[i - 1]) / (t[i] - t[i - 1]);
        Ok(v[i - 1] + w * (v[i] - v[i - 1]))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Potential;
    use crate::spectral::galerkin::{assemble_galerkin, GalerkinProcess};
    use crate::spectral::gaussian::gaussian_propagator_norm;

    fn exp_curve(rate: f64, grid: &[f64]) -> DecayCurve {
        DecayCurve::from_fn(grid, Provenance::Exact, |t| Ok((-rate * t).exp())).unwrap()
    }

    #[test]
    fn grid_construction() {
        let g = uniform_grid(0.0, 5.0, 0.01).unwrap();
        assert_eq!(g.len(), 501);
        assert!((g[500] - 5.0).abs() < 1e-12);
        assert!(uniform_grid(0.0, 1.0, 0.0).is_err());
        assert!(uniform_grid(1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn curve_validation() {
        assert!(DecayCurve::new(vec![0.0, 1.0], vec![1.0, 0.5], Provenance::Exact).is_ok());
        assert!(DecayCurve::new(vec![0.0, 0.0], vec![1.0, 0.5], Provenance::Exact).is_err());
        assert!(DecayCurve::new(vec![0.0, 1.0], vec![0.9, 0.5], Provenance::Exact).is_err());
        assert!(DecayCurve::new(vec![0.0, 1.0], vec![1.0, f64::NAN], Provenance::Exact).is_err());
    }

    #[test]
    fn overdamped_relaxation_is_two_log_inverse_eps() {
        let grid = uniform_grid(0.0, 20.0, 0.05).unwrap();
        let curve = exp_curve(0.5, &grid);
        for eps in [0.5, (-1.0f64).exp(), 0.1] {
            let r = relaxation_time(&curve, eps, |t| Ok((-0.5 * t).exp())).unwrap();
            assert!((r.time - 2.0 * (1.0 / eps).ln()).abs() < 1e-6);
            assert!(r.persistent);
        }
        assert_eq!(relaxation_time(&curve, 1.0, |_| Ok(1.0)).unwrap().time, 0.0);
    }

    #[test]
    fn critical_langevin_relaxation() {
        let grid = uniform_grid(0.0, 6.0, 0.01).unwrap();
        let norm = |t| gaussian_propagator_norm(2.0, t);
        let curve = DecayCurve::from_fn(&grid, Provenance::Exact, norm).unwrap();
        let r = relaxation_time(&curve, (-1.0f64).exp(), norm).unwrap();
        assert!((r.time - 2.7291169).abs() < 1e-5, "{}", r.time);
        assert!(r.time <= 2.73);
    }

    #[test]
    fn missing_crossing_is_an_error() {
        let grid = uniform_grid(0.0, 1.0, 0.1).unwrap();
        let curve = exp_curve(0.5, &grid);
        assert!(matches!(relaxation_time_on_grid(&curve, 0.1), Err(Error::NoCrossing { .. })));
    }

    #[test]
    fn non_persistent_crossing_is_flagged() {
        let times = vec![0.0, 1.0, 2.0, 3.0];
        let curve = DecayCurve::new(times, vec![1.0, 0.3, 0.5, 0.2], Provenance::Estimated).unwrap();
        let r = relaxation_time_on_grid(&curve, 0.4).unwrap();
        assert!(!r.persistent);
        assert!(r.time > 0.0 && r.time < 1.0);
    }

    #[test]
    fn relaxation_non_increasing_in_eps() {
        let grid = uniform_grid(0.0, 10.0, 0.02).unwrap();
        let norm = |t| gaussian_propagator_norm(1.0, t);
        let curve = DecayCurve::from_fn(&grid, Provenance::Exact, norm).unwrap();
        let ts: Vec<f64> =
            [0.1, 0.2, 0.4, 0.6, 0.9].iter().map(|&e| relaxation_time(&curve, e, norm).unwrap().time).collect();
        assert!(ts.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn galerkin_curves_are_submultiplicative() {
        let pot = Potential::double_well(0.5).unwrap();
        let g = assemble_galerkin(GalerkinProcess::Langevin, &pot, 1.0, 12).unwrap();
        let grid = uniform_grid(0.0, 4.0, 0.25).unwrap();
        let v = g.propagator_norms(&grid).unwrap();
        for i in 0..grid.len() {
            for j in 0..grid.len() - i {
                assert!(v[i + j] <= v[i] * v[j] + 1e-8);
            }
        }
    }

    #[test]
    fn overdamped_galerkin_decay_is_exponential() {
        let pot = Potential::quadratic(1.0, 1).unwrap();
        let g = assemble_galerkin(GalerkinProcess::Overdamped, &pot, 0.0, 16).unwrap();
        let grid = uniform_grid(0.0, 10.0, 0.1).unwrap();
        let curve = operator_norm_decay(&g, &grid).unwrap();
        assert!(curve.is_converged());
        for (t, v) in curve.times().iter().zip(curve.values()) {
            assert!((v - (-t / 2.0).exp()).abs() < 1e-12);
        }
    }
}
