use super::hamiltonian::{adaptive_flow, ENERGY_TOLERANCE};
use super::{exponential, standard_normal_vec, EventKind, EventRecord, PhaseState};
use crate::model::Potential;
use crate::rng::ChainRng;
use crate::{Error, Result};

/// Randomised HMC: Hamiltonian flow for `Exp(γ)` durations, each followed by
/// a complete refresh `v ~ N(0, I_d)`, until `horizon`.
///
/// Flights use the exact flow for quadratic potentials and leapfrog with
/// step halving from `h` (per-flight energy error below
/// [`ENERGY_TOLERANCE`]) otherwise.
pub fn rhmc_trajectory(
    state: &PhaseState,
    pot: &Potential,
    gamma: f64,
    horizon: f64,
    h: f64,
    rng: &mut ChainRng,
) -> Result<(PhaseState, Vec<EventRecord>)> {
    if !(gamma > 0.0) {
        return Err(Error::invalid("gamma", "refresh rate must be positive"));
    }
    if !(horizon >= 0.0) {
        return Err(Error::invalid("horizon", "must be non-negative"));
    }
    state.check_dim(pot)?;
    let mut s = state.clone();
    let mut events = Vec::new();
    let mut t = 0.0;
    loop {
        let tau = exponential(rng, gamma);
        if t + tau >= horizon {
            s = adaptive_flow(&s, pot, horizon - t, h, ENERGY_TOLERANCE)?.0;
            return Ok((s, events));
        }
        s = adaptive_flow(&s, pot, tau, h, ENERGY_TOLERANCE)?.0;
        t += tau;
        let v_before = std::mem::replace(&mut s.v, standard_normal_vec(rng, pot.dim()));
        events.push(EventRecord { time: t, kind: EventKind::Refresh, x: s.x.clone(), v_before, v_after: s.v.clone() });
    }
}

/// RHMC driven by explicit flight durations: flow for each duration, then
/// refresh. Useful for degenerate schedules (e.g. all-zero durations).
pub fn rhmc_flights(
    state: &PhaseState,
    pot: &Potential,
    flights: &[f64],
    h: f64,
    rng: &mut ChainRng,
) -> Result<(PhaseState, Vec<EventRecord>)> {
    state.check_dim(pot)?;
    let mut s = state.clone();
    let mut events = Vec::with_capacity(flights.len());
    let mut t = 0.0;
    for &tau in flights {
        if !(tau >= 0.0) {
            return Err(Error::invalid("flights", "durations must be non-negative"));
        }
        s = adaptive_flow(&s, pot, tau, h, ENERGY_TOLERANCE)?.0;
        t += tau;
        let v_before = std::mem::replace(&mut s.v, standard_normal_vec(rng, pot.dim()));
        events.push(EventRecord { time: t, kind: EventKind::Refresh, x: s.x.clone(), v_before, v_after: s.v.clone() });
    }
    Ok((s, events))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::chain_rng;
    use crate::stats::{batch_mean_se, Moments};

    #[test]
    fn zero_length_flights_never_move() {
        let pot = Potential::double_well(0.5).unwrap();
        let s0 = PhaseState::new(vec![0.37], vec![2.0]).unwrap();
        let mut rng = chain_rng(1, 0);
        let (s, ev) = rhmc_flights(&s0, &pot, &[0.0; 100], 0.1, &mut rng).unwrap();
        assert_eq!(s.x, s0.x);
        assert_eq!(ev.len(), 100);
    }

    #[test]
    fn rejects_bad_arguments() {
        let pot = Potential::quadratic(1.0, 1).unwrap();
        let s0 = PhaseState::new(vec![0.0], vec![1.0]).unwrap();
        let mut rng = chain_rng(1, 0);
        assert!(rhmc_trajectory(&s0, &pot, 1.0, -1.0, 0.1, &mut rng).is_err());
        assert!(rhmc_trajectory(&s0, &pot, 0.0, 1.0, 0.1, &mut rng).is_err());
    }

    #[test]
    fn refresh_count_is_poisson() {
        let pot = Potential::quadratic(1.0, 1).unwrap();
        let (gamma, horizon) = (2.0, 5.0);
        let mut m = Moments::new();
        for c in 0..5_000u64 {
            let mut rng = chain_rng(9, c);
            let s0 = PhaseState::new(vec![0.0], vec![1.0]).unwrap();
            let (_, ev) = rhmc_trajectory(&s0, &pot, gamma, horizon, 0.1, &mut rng).unwrap();
            assert!(ev.windows(2).all(|w| w[0].time < w[1].time));
            assert!(ev.iter().all(|e| e.time < horizon));
            m.push(ev.len() as f64);
        }
        assert!((m.mean() - gamma * horizon).abs() < 3.0 * m.standard_error());
    }

    #[test]
    fn stationary_covariance_is_identity() {
        let pot = Potential::quadratic(1.0, 1).unwrap();
        let (mut xx, mut vv, mut xv) = (Vec::new(), Vec::new(), Vec::new());
        for c in 0..40u64 {
            let mut rng = chain_rng(4, c);
            let mut s = PhaseState::new(vec![2.0], vec![0.0]).unwrap();
            s = rhmc_trajectory(&s, &pot, 2.0, 20.0, 0.1, &mut rng).unwrap().0;
            let (mut a, mut b, mut d) = (Moments::new(), Moments::new(), Moments::new());
            for _ in 0..2_000 {
                s = rhmc_trajectory(&s, &pot, 2.0, 0.5, 0.1, &mut rng).unwrap().0;
                a.push(s.x[0] * s.x[0]);
                b.push(s.v[0] * s.v[0]);
                d.push(s.x[0] * s.v[0]);
            }
            xx.push(a.mean());
            vv.push(b.mean());
            xv.push(d.mean());
        }
        for (vals, target) in [(&xx, 1.0), (&vv, 1.0), (&xv, 0.0)] {
            let (m, se) = batch_mean_se(vals);
            assert!((m - target).abs() < 3.0 * se, "{m} ± {se} vs {target}");
        }
    }
}
