use super::PhaseState;
use crate::model::{Potential, PotentialKind};
use crate::{Error, Result};

/// Per-flight energy error accepted by [`adaptive_flow`].
pub const ENERGY_TOLERANCE: f64 = 1e-6;

const MAX_HALVINGS: u32 = 30;

#[inline]
fn kick(v: &mut [f64], grad: &[f64], dt: f64) {
    for (vi, gi) in v.iter_mut().zip(grad) {
        *vi -= dt * gi;
    }
}

#[inline]
fn drift(x: &mut [f64], v: &[f64], dt: f64) {
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi += dt * vi;
    }
}

/// Half kick followed by half drift. `grad` holds `∇U(x)` on entry.
#[inline]
pub(crate) fn kick_drift(state: &mut PhaseState, grad: &[f64], half: f64) {
    kick(&mut state.v, grad, half);
    drift(&mut state.x, &state.v, half);
}

/// Half drift followed by half kick; leaves `∇U(x')` in `grad`.
#[inline]
pub(crate) fn drift_kick(state: &mut PhaseState, grad: &mut [f64], pot: &Potential, half: f64) {
    drift(&mut state.x, &state.v, half);
    pot.gradient_into(&state.x, grad);
    kick(&mut state.v, grad, half);
}

/// One velocity-Verlet step of size `h`, with the drift split in two
/// halves so that the kinetic Langevin step with `γ = 0` is bitwise the same
/// map. `grad` must hold `∇U(x)` on entry and holds `∇U(x')` on exit.
pub fn leapfrog_step(state: &mut PhaseState, grad: &mut [f64], pot: &Potential, h: f64) {
    let half = 0.5 * h;
    kick_drift(state, grad, half);
    drift_kick(state, grad, pot, half);
}

/// Leapfrog integration over `[0, t]` with `ceil(t/h)` equal steps.
pub fn leapfrog_flow(state: &PhaseState, pot: &Potential, t: f64, h: f64) -> Result<PhaseState> {
    if !(h > 0.0) {
        return Err(Error::invalid("h", "leapfrog step must be positive"));
    }
    if !(t >= 0.0) {
        return Err(Error::invalid("t", "duration must be non-negative"));
    }
    let mut s = state.clone();
    if t == 0.0 {
        return Ok(s);
    }
    let n = (t / h).ceil().max(1.0) as usize;
    let dt = t / n as f64;
    let mut grad = pot.gradient(&s.x);
    for _ in 0..n {
        leapfrog_step(&mut s, &mut grad, pot, dt);
    }
    if !s.is_finite() {
        return Err(Error::NonFinite("leapfrog trajectory".into()));
    }
    Ok(s)
}

/// Hamiltonian flow `ẋ = v, v̇ = -∇U(x)` for time `t`.
///
/// Quadratic potentials are integrated exactly (a rotation by `√m t` in the
/// coordinates `(x, v/√m)`); otherwise leapfrog with step `h` is used.
pub fn hamiltonian_flow(state: &PhaseState, pot: &Potential, t: f64, h: Option<f64>) -> Result<PhaseState> {
    state.check_dim(pot)?;
    if !(t >= 0.0) {
        return Err(Error::invalid("t", "duration must be non-negative"));
    }
    if t == 0.0 {
        return Ok(state.clone());
    }
    match pot.kind() {
        PotentialKind::Quadratic { m } => {
            let w = m.sqrt();
            let (s, c) = (w * t).sin_cos();
            let x = state.x.iter().zip(&state.v).map(|(x, v)| x * c + v / w * s).collect();
            let v = state.x.iter().zip(&state.v).map(|(x, v)| -x * w * s + v * c).collect();
            Ok(PhaseState { x, v })
        }
        _ => {
            let h = h.ok_or_else(|| Error::invalid("h", "leapfrog step required"))?;
            leapfrog_flow(state, pot, t, h)
        }
    }
}

/// Flow for time `t` with the energy error kept below `tolerance`: exact for
/// quadratic potentials, otherwise leapfrog starting at step `h` and halving
/// until `|ΔH| < tolerance`. Returns the final state and the step used.
pub fn adaptive_flow(state: &PhaseState, pot: &Potential, t: f64, h: f64, tolerance: f64) -> Result<(PhaseState, f64)> {
    if pot.is_gaussian() {
        return Ok((hamiltonian_flow(state, pot, t, None)?, 0.0));
    }
    let h0 = state.hamiltonian(pot);
    let mut step = h;
    for _ in 0..=MAX_HALVINGS {
        let s = leapfrog_flow(state, pot, t, step)?;
        if (s.hamiltonian(pot) - h0).abs() < tolerance {
            return Ok((s, step));
        }
        step *= 0.5;
    }
    Err(Error::EnergyTolerance { tolerance, halvings: MAX_HALVINGS })
}
