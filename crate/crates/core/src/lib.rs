//! Second-order lifts of reversible diffusions.
//!
//! The crate is organised around five pieces that build on each other:
//!
//! * [`model`]: potentials, target measures, quadrature, polynomial test
//!   functions and the Dirichlet form of the overdamped Langevin diffusion.
//! * [`samplers`]: the overdamped diffusion and its lifts (Hamiltonian flow,
//!   kinetic Langevin, randomised HMC, the Bouncy Particle Sampler) plus the
//!   lifted random walk on the discrete circle.
//! * [`liftcheck`]: Monte Carlo verification of the first- and second-order
//!   lift identities on polynomial dictionaries.
//! * [`spectral`]: operator-norm decay curves, spectral and singular value
//!   gaps, relaxation times and total-variation mixing times.
//! * [`bounds`]: the hypocoercivity constants pipeline, relaxation-time
//!   bounds and optimality certificates.
//!
//! Results that leave the crate carry a [`Provenance`] tag saying how the
//! number was obtained.

// `!(x > 0.0)` is used on purpose: unlike `x <= 0.0` it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
mod error;
pub mod liftcheck;
pub mod linalg;
pub mod model;
mod provenance;
pub mod rng;
pub mod samplers;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use provenance::{Provenance, Tagged};

pub use bounds::{BoundsReport, DivergenceConstants, StpiConstants};
pub use liftcheck::LiftReport;
pub use model::{Potential, PotentialKind, Quadrature, TargetMeasure, TestFunction};
pub use samplers::{ChainConfig, EventKind, EventRecord, PhaseState, Process};
pub use spectral::{DecayCurve, GeneratorMatrix, SpectralReport};
