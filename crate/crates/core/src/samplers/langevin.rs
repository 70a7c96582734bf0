use rand::Rng;
use rand_distr::StandardNormal;

use super::hamiltonian::{drift_kick, kick_drift};
use super::PhaseState;
use crate::model::Potential;
use crate::rng::ChainRng;
use crate::{Error, Result};

fn ou_coefficients(gamma: f64, h: f64) -> (f64, f64) {
    let c = (-gamma * h).exp();
    (c, (1.0 - c * c).max(0.0).sqrt())
}

fn check(gamma: f64, h: f64) -> Result<()> {
    if !(gamma >= 0.0) {
        return Err(Error::invalid("gamma", "friction must be non-negative"));
    }
    if !(h > 0.0) {
        return Err(Error::invalid("h", "step size must be positive"));
    }
    Ok(())
}

/// One BAOAB step of kinetic Langevin dynamics
/// `dX = V dt, dV = -∇U(X) dt - γV dt + √(2γ) dB`: half kick and half drift,
/// the exact Ornstein–Uhlenbeck velocity update
/// `v ← e^{-γh} v + √(1 - e^{-2γh}) · noise`, then half drift and half kick.
pub fn langevin_step(state: &PhaseState, pot: &Potential, gamma: f64, h: f64, noise: &[f64]) -> Result<PhaseState> {
    check(gamma, h)?;
    state.check_dim(pot)?;
    let mut s = state.clone();
    let mut grad = pot.gradient(&s.x);
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("Langevin force".into()));
    }
    let (c, sd) = ou_coefficients(gamma, h);
    kick_drift(&mut s, &grad, 0.5 * h);
    for (v, z) in s.v.iter_mut().zip(noise) {
        *v = c * *v + sd * z;
    }
    drift_kick(&mut s, &mut grad, pot, 0.5 * h);
    if !s.is_finite() {
        return Err(Error::NonFinite("Langevin state".into()));
    }
    Ok(s)
}

/// In-place BAOAB step drawing its own noise. `grad` holds `∇U(x)` on entry
/// and `∇U(x')` on exit.
pub fn langevin_step_in_place(
    state: &mut PhaseState,
    grad: &mut [f64],
    pot: &Potential,
    gamma: f64,
    h: f64,
    rng: &mut ChainRng,
) -> Result<()> {
    check(gamma, h)?;
    let (c, sd) = ou_coefficients(gamma, h);
    kick_drift(state, grad, 0.5 * h);
    for v in state.v.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *v = c * *v + sd * z;
    }
    drift_kick(state, grad, pot, 0.5 * h);
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("Langevin force".into()));
    }
    Ok(())
}
