//! One runner per subcommand. Each turns a validated plan into an [`Outcome`].

mod bounds;
mod circle;
mod liftcheck;
mod reproduce;
mod simulate;
mod spectral;

use liftlab::spectral::{relaxation_time, uniform_grid, DecayCurve, GeneratorMatrix, RelaxationTime};
use liftlab::{Error, Provenance, Result};

use crate::config::Plan;
use crate::report::Outcome;

pub fn run(plan: &Plan, seed: u64) -> Result<Outcome> {
    match plan {
        Plan::Simulate(p) => simulate::run(p, seed),
        Plan::Liftcheck(p) => liftcheck::run(p, seed),
        Plan::Spectral(p) => spectral::run(p, seed),
        Plan::Circle(p) => circle::run(p),
        Plan::Bounds(p) => bounds::run(p),
        Plan::Reproduce(t) => reproduce::run(*t),
    }
}

/// Longest horizon tried when searching for a relaxation time.
const MAX_HORIZON: f64 = 2000.0;

/// `ε`-relaxation time of a Galerkin semigroup, doubling the horizon
/// until the curve crosses `ε`.
pub(crate) fn galerkin_relaxation(g: &GeneratorMatrix, eps: f64) -> Result<RelaxationTime> {
    let mut horizon = 10.0;
    loop {
        let grid = uniform_grid(0.0, horizon, horizon / 400.0)?;
        let curve = DecayCurve::new(grid.clone(), g.propagator_norms(&grid)?, Provenance::Galerkin)?;
        match relaxation_time(&curve, eps, |t| g.propagator_norm(t)) {
            Err(Error::NoCrossing { .. }) if horizon < MAX_HORIZON => horizon *= 2.0,
            other => return other,
        }
    }
}
