use rayon::prelude::*;

use super::decay::DecayCurve;
use crate::model::{Potential, Quadrature, TargetMeasure, TestFunction, DEFAULT_NODES};
use crate::rng::chain_rng;
use crate::samplers::{stationary_samples, PhaseState, Process, StreamSource};
use crate::stats::Moments;
use crate::{Error, Provenance, Result};

/// Largest relative standard error tolerated where the estimate is above
/// [`EMPIRICAL_FLOOR`].
pub const MAX_RELATIVE_SE: f64 = 0.2;

/// Below this value the relative-error gate is not applied: the estimate is
/// a difference of two small numbers and only its absolute error matters.
pub const EMPIRICAL_FLOOR: f64 = 0.05;

/// Settings for [`empirical_decay`].
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalConfig {
    /// Stationary starting points.
    pub outer: usize,
    /// Conditional replicas per starting point (at least 2).
    pub inner: usize,
    /// Integrator step for the processes that need one.
    pub step: f64,
    pub source: StreamSource,
    pub seed: u64,
}

/// Monte Carlo estimate of `‖P_t f‖ / ‖f‖` for a mean-zero version of `f`.
///
/// `E[(E[f(X_t) | X_0])²]` is estimated without bias from `R` replicas as
/// `m² - s²/R` (replica mean `m`, replica variance `s²`), averaged over
/// stationary starts. This lower-bounds the operator-norm curve.
pub fn empirical_decay(
    process: Process,
    pot: &Potential,
    gamma: f64,
    f: &TestFunction,
    grid: &[f64],
    cfg: &EmpiricalConfig,
) -> Result<DecayCurve> {
    if cfg.outer < 2 || cfg.inner < 2 {
        return Err(Error::invalid("replicas", "need at least two starts and two replicas each"));
    }
    if grid.first() != Some(&0.0) || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("grid", "must start at 0 and increase strictly"));
    }
    if f.dim() != pot.dim() {
        return Err(Error::invalid("f", "dimension does not match the potential"));
    }
    if f.is_constant() {
        return Err(Error::invalid("f", "must be non-constant"));
    }
    let quad = Quadrature::for_potential(pot, if pot.dim() == 1 { DEFAULT_NODES } else { 40 })?;
    let mean = quad.expect(|x| f.eval(x));
    let var = quad.expect(|x| (f.eval(x) - mean).powi(2));
    if !(var > 1e-14) {
        return Err(Error::invalid("f", "is constant under the target"));
    }

    let measure = TargetMeasure::phase_space(pot.clone());
    let starts = match cfg.source {
        StreamSource::Exact => stationary_samples(&measure, cfg.source, cfg.outer, 1, cfg.seed)?,
        StreamSource::Overdamped { .. } => {
            let chains = cfg.outer.min(16);
            stationary_samples(&measure, cfg.source, chains, cfg.outer.div_ceil(chains), cfg.seed)?
        }
    };
    let start = |i: usize| {
        let (c, k) = (i / starts.per_chain(), i % starts.per_chain());
        starts.get(c, k)
    };
    let replica_seed = cfg.seed ^ 0x5EE_D0FD_ECA7;

    let per_start: Vec<Vec<f64>> = (0..cfg.outer)
        .into_par_iter()
        .map(|i| {
            let (x0, v0) = start(i);
            let init = if process.is_lift() {
                PhaseState::new(x0.to_vec(), v0.to_vec())?
            } else {
                PhaseState::position_only(x0.to_vec())?
            };
            let mut acc = vec![Moments::new(); grid.len()];
            for r in 0..cfg.inner {
                let mut rng = chain_rng(replica_seed, (i * cfg.inner + r) as u64);
                let mut s = init.clone();
                let mut t = 0.0;
                for (k, &tk) in grid.iter().enumerate() {
                    process.advance(&mut s, pot, gamma, tk - t, cfg.step, &mut rng)?;
                    t = tk;
                    acc[k].push(f.eval(&s.x) - mean);
                }
            }
            let big_r = cfg.inner as f64;
            Ok(acc.iter().map(|m| m.mean() * m.mean() - m.variance() / big_r).collect())
        })
        .collect::<Result<_>>()?;

    let mut values = Vec::with_capacity(grid.len());
    let mut ses = Vec::with_capacity(grid.len());
    let sd = var.sqrt();
    for k in 0..grid.len() {
        let y: Moments = per_start.iter().map(|v| v[k]).collect();
        let (est, se_y) = (y.mean(), y.standard_error());
        let (value, se) = if est > 0.0 {
            let v = est.sqrt() / sd;
            (v, se_y / (2.0 * var * v))
        } else {
            (0.0, se_y.sqrt() / sd)
        };
        if value > EMPIRICAL_FLOOR && se > MAX_RELATIVE_SE * value {
            return Err(Error::InnerReplicas { time: grid[k], relative_se: se / value });
        }
        values.push(value);
        ses.push(se);
    }
    DecayCurve::new(grid.to_vec(), values, Provenance::MonteCarlo)?.with_std_errors(ses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::decay::uniform_grid;

    fn cfg(outer: usize, inner: usize) -> EmpiricalConfig {
        EmpiricalConfig { outer, inner, step: 1e-3, source: StreamSource::Exact, seed: 17 }
    }

    #[test]
    fn overdamped_gaussian_coordinate_decays_like_exp_minus_half_t() {
        let pot = Potential::quadratic(1.0, 1).unwrap();
        let f = TestFunction::coordinate(1, 0);
        let grid = uniform_grid(0.0, 3.0, 0.5).unwrap();
        let c = empirical_decay(Process::Overdamped, &pot, 0.0, &f, &grid, &cfg(1000, 8)).unwrap();
        let se = c.std_errors().unwrap();
        for ((t, v), s) in grid.iter().zip(c.values()).zip(se) {
            assert!((v - (-t / 2.0).exp()).abs() < 4.0 * s, "t={t}: {v} ± {s}");
        }
        assert!((c.values()[0] - 1.0).abs() < 4.0 * se[0]);
    }

    #[test]
    fn bps_curve_lies_below_one() {
        let pot = Potential::quadratic(1.0, 1).unwrap();
        let f = TestFunction::coordinate(1, 0);
        let grid = uniform_grid(0.0, 2.0, 0.5).unwrap();
        let c = empirical_decay(Process::Bps, &pot, 1.0, &f, &grid, &cfg(400, 8)).unwrap();
        assert!(c.values()[4] < 0.9);
    }

    #[test]
    fn constant_functions_are_rejected() {
        let pot = Potential::quadratic(1.0, 1).unwrap();
        let grid = [0.0, 1.0];
        let f = TestFunction::constant(1, 3.0);
        assert!(empirical_decay(Process::Langevin, &pot, 1.0, &f, &grid, &cfg(10, 4)).is_err());
    }

    #[test]
    fn too_few_replicas_is_reported() {
        let pot = Potential::quadratic(1.0, 1).unwrap();
        let f = TestFunction::coordinate(1, 0);
        let grid = uniform_grid(0.0, 1.0, 0.5).unwrap();
        let err = empirical_decay(Process::Overdamped, &pot, 0.0, &f, &grid, &cfg(4, 2)).unwrap_err();
        assert!(matches!(err, Error::InnerReplicas { .. }), "{err:?}");
    }
}
