//! The overdamped Langevin diffusion, its second-order lifts, and the
//! lifted random walk on the discrete circle.

mod bps;
mod circle;
mod hamiltonian;
mod langevin;
mod overdamped;
mod rhmc;
mod stationary;

pub use bps::{bps_trajectory, bps_trajectory_with, first_bounce_time, reflect, BounceSampler};
pub use circle::{circle_chains, lifted_index};
pub use hamiltonian::{adaptive_flow, hamiltonian_flow, leapfrog_flow, leapfrog_step, ENERGY_TOLERANCE};
pub use langevin::{langevin_step, langevin_step_in_place};
pub use overdamped::{overdamped_step, overdamped_step_in_place};
pub use rhmc::{rhmc_flights, rhmc_trajectory};
pub use stationary::{stationary_samples, PhaseSamples, StreamSource};

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::model::Potential;
use crate::rng::{chain_rng, ChainRng};
use crate::{Error, Result};

/// Position-velocity state. The overdamped process carries an empty velocity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

impl PhaseState {
    pub fn new(x: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if !v.is_empty() && v.len() != x.len() {
            return Err(Error::invalid("state", "position and velocity lengths differ"));
        }
        let s = Self { x, v };
        if !s.is_finite() {
            return Err(Error::NonFinite("phase state".into()));
        }
        Ok(s)
    }

    pub fn position_only(x: Vec<f64>) -> Result<Self> {
        Self::new(x, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.v).all(|a| a.is_finite())
    }

    /// `H(x, v) = U(x) + |v|²/2`.
    pub fn hamiltonian(&self, pot: &Potential) -> f64 {
        pot.energy(&self.x) + 0.5 * self.v.iter().map(|a| a * a).sum::<f64>()
    }

    pub(crate) fn check_dim(&self, pot: &Potential) -> Result<()> {
        if self.x.len() != pot.dim() {
            return Err(Error::invalid(
                "state",
                format!("dimension {} does not match potential dimension {}", self.x.len(), pot.dim()),
            ));
        }
        Ok(())
    }
}

/// Simulation parameters shared by all processes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    /// Integrator step size (time units).
    pub step: f64,
    /// Friction / refresh rate γ.
    pub gamma: f64,
    pub horizon: f64,
    pub seed: u64,
    pub chains: usize,
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::invalid("step", "must be positive"));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid("gamma", "must be non-negative"));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(Error::invalid("horizon", "must be non-negative"));
        }
        if self.chains == 0 {
            return Err(Error::invalid("chains", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Bounce,
    Refresh,
    Flip,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Bounce => "bounce",
            EventKind::Refresh => "refresh",
            EventKind::Flip => "flip",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub time: f64,
    pub kind: EventKind,
    /// Position at the event.
    pub x: Vec<f64>,
    pub v_before: Vec<f64>,
    pub v_after: Vec<f64>,
}

/// The simulated processes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Process {
    Overdamped,
    Hamiltonian,
    Langevin,
    Rhmc,
    Bps,
}

impl Process {
    pub const LIFTS: [Process; 4] = [Process::Hamiltonian, Process::Langevin, Process::Rhmc, Process::Bps];

    pub fn as_str(self) -> &'static str {
        match self {
            Process::Overdamped => "overdamped",
            Process::Hamiltonian => "hamiltonian",
            Process::Langevin => "langevin",
            Process::Rhmc => "rhmc",
            Process::Bps => "bps",
        }
    }

    pub fn is_lift(self) -> bool {
        self != Process::Overdamped
    }

    /// Advance `state` by `duration`, returning events with times relative
    /// to the start. Integrators use step `h`; the jump processes are
    /// memoryless, so splitting a run into consecutive calls is exact.
    pub fn advance(
        self,
        state: &mut PhaseState,
        pot: &Potential,
        gamma: f64,
        duration: f64,
        h: f64,
        rng: &mut ChainRng,
    ) -> Result<Vec<EventRecord>> {
        if !(duration >= 0.0) {
            return Err(Error::invalid("duration", "must be non-negative"));
        }
        if duration == 0.0 {
            return Ok(Vec::new());
        }
        let steps = || (duration / h).ceil().max(1.0) as usize;
        match self {
            Process::Overdamped => {
                let n = steps();
                let dt = duration / n as f64;
                let mut grad = vec![0.0; state.dim()];
                for _ in 0..n {
                    overdamped_step_in_place(&mut state.x, &mut grad, pot, dt, rng)?;
                }
                Ok(Vec::new())
            }
            Process::Hamiltonian => {
                *state = hamiltonian_flow(state, pot, duration, Some(h))?;
                Ok(Vec::new())
            }
            Process::Langevin => {
                let n = steps();
                let dt = duration / n as f64;
                let mut grad = vec![0.0; state.dim()];
                pot.gradient_into(&state.x, &mut grad);
                for _ in 0..n {
                    langevin_step_in_place(state, &mut grad, pot, gamma, dt, rng)?;
                }
                Ok(Vec::new())
            }
            Process::Rhmc => {
                let (s, ev) = rhmc_trajectory(state, pot, gamma, duration, h, rng)?;
                *state = s;
                Ok(ev)
            }
            Process::Bps => {
                let (s, ev) = bps_trajectory(state, pot, gamma, duration, rng)?;
                *state = s;
                Ok(ev)
            }
        }
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Process {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "overdamped" => Ok(Process::Overdamped),
            "hamiltonian" => Ok(Process::Hamiltonian),
            "langevin" => Ok(Process::Langevin),
            "rhmc" => Ok(Process::Rhmc),
            "bps" => Ok(Process::Bps),
            other => Err(Error::invalid(
                "process",
                format!("unknown process `{other}` (known: overdamped, hamiltonian, langevin, rhmc, bps)"),
            )),
        }
    }
}

pub(crate) fn standard_normal_vec(rng: &mut ChainRng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

pub(crate) fn exponential(rng: &mut ChainRng, rate: f64) -> f64 {
    if rate <= 0.0 {
        return f64::INFINITY;
    }
    let u: f64 = rng.random();
    // 1 - u lies in (0, 1]
    -(1.0 - u).ln() / rate
}

/// One row of a recorded trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub event: Option<EventKind>,
}

/// Simulate `config.chains` independent chains from `init`, recording the
/// state every `record_every` time units plus one row per event.
/// Chain `i` uses stream `(config.seed, i)`; results are in chain order.
pub fn simulate(
    process: Process,
    pot: &Potential,
    init: &PhaseState,
    config: &ChainConfig,
    record_every: f64,
) -> Result<Vec<Vec<TrajectoryRow>>> {
    config.validate()?;
    init.check_dim(pot)?;
    if !(record_every > 0.0) {
        return Err(Error::invalid("record_every", "must be positive"));
    }
    if process.is_lift() && init.v.len() != pot.dim() {
        return Err(Error::invalid("state", "lifted processes need a velocity"));
    }
    if process == Process::Rhmc && config.gamma <= 0.0 {
        return Err(Error::invalid("gamma", "RHMC needs a positive refresh rate"));
    }
    (0..config.chains)
        .into_par_iter()
        .map(|chain| {
            let mut rng = chain_rng(config.seed, chain as u64);
            let mut state = init.clone();
            if process == Process::Overdamped {
                state.v.clear();
            }
            let mut rows = vec![TrajectoryRow { t: 0.0, x: state.x.clone(), v: state.v.clone(), event: None }];
            let mut t = 0.0;
            let n = (config.horizon / record_every).ceil() as usize;
            for k in 1..=n {
                let next = (k as f64 * record_every).min(config.horizon);
                let events = process.advance(&mut state, pot, config.gamma, next - t, config.step, &mut rng)?;
                for e in events {
                    rows.push(TrajectoryRow {
                        t: t + e.time,
                        x: e.x.clone(),
                        v: e.v_after.clone(),
                        event: Some(e.kind),
                    });
                }
                t = next;
                rows.push(TrajectoryRow { t, x: state.x.clone(), v: state.v.clone(), event: None });
            }
            Ok(rows)
        })
        .collect()
}
