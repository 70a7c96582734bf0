use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default cap on the number of steps.
pub const DEFAULT_MIXING_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum MixingTime {
    Steps {
        steps: u64,
    },
    /// The distance was still above the tolerance after `cap` steps.
    NoMixing {
        cap: u64,
        distance: f64,
    },
}

impl MixingTime {
    pub fn steps(self) -> Option<u64> {
        match self {
            MixingTime::Steps { steps } => Some(steps),
            MixingTime::NoMixing { .. } => None,
        }
    }
}

/// `max_x TV(δ_x Pᵏ, π)`.
pub fn worst_tv_distance(pk: &DMatrix<f64>, target: &[f64]) -> f64 {
    (0..pk.nrows())
        .map(|i| 0.5 * pk.row(i).iter().zip(target).map(|(a, b)| (a - b).abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Smallest `k ≤ cap` with `max_x TV(δ_x Pᵏ, target) ≤ tol`.
///
/// When `target` is stationary for `P` the distance is non-increasing in
/// `k`, so the answer is bracketed by repeated squaring and located by
/// bisection. Otherwise the chain is powered one step at a time.
pub fn tv_mixing_time(p: &DMatrix<f64>, target: &[f64], tol: f64, cap: u64) -> Result<MixingTime> {
    let n = p.nrows();
    if !p.is_square() || n == 0 {
        return Err(Error::invalid("P", "must be a non-empty square matrix"));
    }
    if target.len() != n || target.iter().any(|&a| !(a >= 0.0)) || (target.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(Error::NotADistribution(format!("target of length {} over {n} states", target.len())));
    }
    for i in 0..n {
        let row = p.row(i);
        if row.iter().any(|&a| !(a >= 0.0)) || (row.sum() - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("P", format!("row {i} is not a probability vector")));
        }
    }
    if !(tol > 0.0) || cap == 0 {
        return Err(Error::invalid("tol", "tolerance and cap must be positive"));
    }

    let moved: Vec<f64> = (0..n).map(|j| (0..n).map(|i| target[i] * p[(i, j)]).sum()).collect();
    let stationary = moved.iter().zip(target).all(|(a, b)| (a - b).abs() <= 1e-12);
    if !stationary {
        let mut pk = p.clone();
        for k in 1..=cap {
            if worst_tv_distance(&pk, target) <= tol {
                return Ok(MixingTime::Steps { steps: k });
            }
            pk = &pk * p;
        }
        return Ok(MixingTime::NoMixing { cap, distance: worst_tv_distance(&pk, target) });
    }

    // pows[i] = P^(2^i)
    let mut pows = vec![p.clone()];
    loop {
        let k = 1u64 << (pows.len() - 1);
        if worst_tv_distance(pows.last().unwrap(), target) <= tol {
            break;
        }
        if k >= cap {
            let pc = power(&pows, cap, n);
            let distance = worst_tv_distance(&pc, target);
            if distance > tol {
                return Ok(MixingTime::NoMixing { cap, distance });
            }
            break;
        }
        let last = pows.last().unwrap();
        pows.push(last * last);
    }
    // distance(hi) ≤ tol < distance(lo)
    let top = pows.len() - 1;
    let mut hi = (1u64 << top).min(cap);
    if top == 0 {
        return Ok(MixingTime::Steps { steps: 1 });
    }
    let mut lo = 1u64 << (top - 1);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if worst_tv_distance(&power(&pows, mid, n), target) <= tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(MixingTime::Steps { steps: hi })
}

fn power(pows: &[DMatrix<f64>], k: u64, n: usize) -> DMatrix<f64> {
    let mut out = DMatrix::identity(n, n);
    let mut rest = k;
    let mut i = 0;
    while rest > 0 {
        if rest & 1 == 1 {
            let pi = if i < pows.len() {
                pows[i].clone()
            } else {
                // extend by squaring beyond what was precomputed
                let mut q = pows.last().unwrap().clone();
                for _ in pows.len() - 1..i {
                    q = &q * &q;
                }
                q
            };
            out = &out * &pi;
        }
        rest >>= 1;
        i += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::circle_chains;
    use crate::stats::ols_slope;

    fn uniform(n: usize) -> Vec<f64> {
        vec![1.0 / n as f64; n]
    }

    /// Oracle: step-by-step powering.
    fn linear(p: &DMatrix<f64>, target: &[f64], tol: f64) -> u64 {
        let mut pk = p.clone();
        let mut k = 1;
        while worst_tv_distance(&pk, target) > tol {
            pk = &pk * p;
            k += 1;
        }
        k
    }

    #[test]
    fn rank_one_chain_mixes_in_one_step() {
        let pi = [0.2, 0.3, 0.5];
        let p = DMatrix::from_fn(3, 3, |_, j| pi[j]);
        assert_eq!(tv_mixing_time(&p, &pi, 0.25, 100).unwrap(), MixingTime::Steps { steps: 1 });
    }

    #[test]
    fn even_cycle_never_mixes() {
        let (p, _) = circle_chains(4, 0.0).unwrap();
        let r = tv_mixing_time(&p, &uniform(4), 0.25, DEFAULT_MIXING_CAP).unwrap();
        assert!(matches!(r, MixingTime::NoMixing { .. }), "{r:?}");
    }

    #[test]
    fn bisection_agrees_with_linear_powering() {
        for n in [5, 9, 13] {
            let (p, q) = circle_chains(n, 1.0 / n as f64).unwrap();
            let a = tv_mixing_time(&p, &uniform(n), 0.25, 10_000).unwrap().steps().unwrap();
            assert_eq!(a, linear(&p, &uniform(n), 0.25));
            let b = tv_mixing_time(&q, &uniform(2 * n), 0.25, 10_000).unwrap().steps().unwrap();
            assert_eq!(b, linear(&q, &uniform(2 * n), 0.25));
        }
    }

    #[test]
    fn non_stationary_target_uses_linear_powering() {
        let (p, _) = circle_chains(5, 0.0).unwrap();
        let skew = [0.6, 0.1, 0.1, 0.1, 0.1];
        let r = tv_mixing_time(&p, &skew, 0.25, 200).unwrap();
        assert!(matches!(r, MixingTime::NoMixing { cap: 200, .. }));
    }

    #[test]
    fn lifted_walk_is_faster() {
        let ns = [9.0f64, 17.0, 33.0];
        let (mut base, mut lift) = (Vec::new(), Vec::new());
        for &n in &ns {
            let (p, q) = circle_chains(n as usize, 1.0 / n).unwrap();
            base.push(
                tv_mixing_time(&p, &uniform(n as usize), 0.25, DEFAULT_MIXING_CAP).unwrap().steps().unwrap() as f64
            );
            lift.push(
                tv_mixing_time(&q, &uniform(2 * n as usize), 0.25, DEFAULT_MIXING_CAP).unwrap().steps().unwrap() as f64
            );
        }
        let logn: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
        let sb = ols_slope(&logn, &base.iter().map(|t| t.ln()).collect::<Vec<_>>());
        let sl = ols_slope(&logn, &lift.iter().map(|t| t.ln()).collect::<Vec<_>>());
        assert!(sb > sl + 0.5, "base slope {sb}, lift slope {sl}");
    }

    #[test]
    fn bad_inputs() {
        let (p, _) = circle_chains(3, 0.0).unwrap();
        assert!(matches!(tv_mixing_time(&p, &[0.5, 0.5, 0.5], 0.25, 10), Err(Error::NotADistribution(_))));
        assert!(matches!(tv_mixing_time(&p, &[0.5, 0.5], 0.25, 10), Err(Error::NotADistribution(_))));
        let bad = DMatrix::from_element(2, 2, 0.7);
        assert!(tv_mixing_time(&bad, &[0.5, 0.5], 0.25, 10).is_err());
    }
}
