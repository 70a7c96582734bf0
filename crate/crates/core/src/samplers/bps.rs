use rand::Rng;

use super::{exponential, standard_normal_vec, EventKind, EventRecord, PhaseState};
use crate::model::{Potential, PotentialKind};
use crate::rng::ChainRng;
use crate::{Error, Result};

/// How bounce times are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BounceSampler {
    /// Exact inversion for quadratic potentials, thinning otherwise.
    Auto,
    /// Always use Poisson thinning against the potential's gradient bound.
    Thinning,
}

/// `v - 2 n nᵀ v` with `n = ∇U / |∇U|`; `v` unchanged where `∇U = 0`.
pub fn reflect(v: &[f64], grad: &[f64]) -> Vec<f64> {
    let g2: f64 = grad.iter().map(|g| g * g).sum();
    if g2 == 0.0 {
        return v.to_vec();
    }
    let dot: f64 = v.iter().zip(grad).map(|(a, b)| a * b).sum();
    v.iter().zip(grad).map(|(vi, gi)| vi - 2.0 * dot / g2 * gi).collect()
}

fn bounce_rate(pot: &Potential, y: &[f64], v: &[f64], grad: &mut [f64]) -> f64 {
    pot.gradient_into(y, grad);
    v.iter().zip(grad.iter()).map(|(a, b)| a * b).sum::<f64>().max(0.0)
}

/// Next bounce in `[0, limit)` for the rate `λ(s) = (v·∇U(x + vs))₊`, or
/// `None` if there is none before `limit`.
fn next_bounce(
    x: &[f64],
    v: &[f64],
    pot: &Potential,
    sampler: BounceSampler,
    limit: f64,
    rng: &mut ChainRng,
) -> Result<Option<f64>> {
    let speed = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if speed == 0.0 {
        return Ok(None);
    }
    if let (BounceSampler::Auto, PotentialKind::Quadratic { m }) = (sampler, pot.kind()) {
        // λ(s) = (a + b s)₊ with a = m v·x, b = m |v|²; invert ∫λ = E.
        let a = m * x.iter().zip(v).map(|(p, q)| p * q).sum::<f64>();
        let b = m * speed * speed;
        let e = exponential(rng, 1.0);
        let tau = if a >= 0.0 { 2.0 * e / (a + (a * a + 2.0 * b * e).sqrt()) } else { -a / b + (2.0 * e / b).sqrt() };
        return Ok((tau < limit).then_some(tau));
    }

    let mut grad = vec![0.0; x.len()];
    let mut y = vec![0.0; x.len()];
    let mut t = 0.0;
    while t < limit {
        let seg_end = (t + (1.0f64).min(1.0 / speed)).min(limit);
        for i in 0..x.len() {
            y[i] = x[i] + v[i] * t;
        }
        let g_bound = pot
            .gradient_norm_bound(&y, speed * (seg_end - t))
            .ok_or_else(|| Error::invalid("potential", "thinning needs a gradient bound"))?;
        let bound = speed * g_bound;
        if !(bound > 0.0) {
            t = seg_end;
            continue;
        }
        loop {
            let s = exponential(rng, bound);
            if t + s >= seg_end {
                t = seg_end;
                break;
            }
            t += s;
            for i in 0..x.len() {
                y[i] = x[i] + v[i] * t;
            }
            let rate = bounce_rate(pot, &y, v, &mut grad);
            if rate > bound * (1.0 + 1e-12) {
                return Err(Error::ThinningBoundViolated { time: t, rate, bound });
            }
            let u: f64 = rng.random();
            if u * bound < rate {
                return Ok(Some(t));
            }
        }
    }
    Ok(None)
}

/// Time of the first bounce from `state` (no refreshment), if before `limit`.
pub fn first_bounce_time(
    state: &PhaseState,
    pot: &Potential,
    sampler: BounceSampler,
    limit: f64,
    rng: &mut ChainRng,
) -> Result<Option<f64>> {
    state.check_dim(pot)?;
    next_bounce(&state.x, &state.v, pot, sampler, limit, rng)
}

/// Bouncy Particle Sampler with refresh rate `γ`, run until `horizon`.
pub fn bps_trajectory(
    state: &PhaseState,
    pot: &Potential,
    gamma: f64,
    horizon: f64,
    rng: &mut ChainRng,
) -> Result<(PhaseState, Vec<EventRecord>)> {
    bps_trajectory_with(state, pot, gamma, horizon, BounceSampler::Auto, rng)
}

pub fn bps_trajectory_with(
    state: &PhaseState,
    pot: &Potential,
    gamma: f64,
    horizon: f64,
    sampler: BounceSampler,
    rng: &mut ChainRng,
) -> Result<(PhaseState, Vec<EventRecord>)> {
    if !(gamma >= 0.0) {
        return Err(Error::invalid("gamma", "refresh rate must be non-negative"));
    }
    if !(horizon >= 0.0) {
        return Err(Error::invalid("horizon", "must be non-negative"));
    }
    state.check_dim(pot)?;
    let d = pot.dim();
    let mut s = state.clone();
    let mut events = Vec::new();
    let mut grad = vec![0.0; d];
    let mut t = 0.0;
    while t < horizon {
        let refresh_in = exponential(rng, gamma);
        let limit = refresh_in.min(horizon - t);
        match next_bounce(&s.x, &s.v, pot, sampler, limit, rng)? {
            Some(tau) => {
                for (xi, vi) in s.x.iter_mut().zip(&s.v) {
                    *xi += vi * tau;
                }
                t += tau;
                pot.gradient_into(&s.x, &mut grad);
                if grad.iter().all(|&g| g == 0.0) {
                    continue;
                }
                let v_after = reflect(&s.v, &grad);
                let v_before = std::mem::replace(&mut s.v, v_after);
                events.push(EventRecord {
                    time: t,
                    kind: EventKind::Bounce,
                    x: s.x.clone(),
                    v_before,
                    v_after: s.v.clone(),
                });
            }
            None => {
                for (xi, vi) in s.x.iter_mut().zip(&s.v) {
                    *xi += vi * limit;
                }
                t += limit;
                if refresh_in < horizon - (t - limit) {
                    let v_before = std::mem::replace(&mut s.v, standard_normal_vec(rng, d));
                    events.push(EventRecord {
                        time: t,
                        kind: EventKind::Refresh,
                        x: s.x.clone(),
                        v_before,
                        v_after: s.v.clone(),
                    });
                } else {
                    t = horizon;
                }
            }
        }
    }
    if !s.is_finite() {
        return Err(Error::NonFinite("BPS state".into()));
    }
    Ok((s, events))
}
