use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

type EnergyFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradientFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;
type BoundFn = dyn Fn(&[f64], f64) -> f64 + Send + Sync;

/// User-supplied potential given by closures.
pub struct CustomPotential {
    pub energy: Box<EnergyFn>,
    pub gradient: Box<GradientFn>,
    /// Upper bound on `|∇U|` over the ball `B(center, radius)`; needed by
    /// the thinning event sampler of the Bouncy Particle Sampler.
    pub gradient_bound: Option<Box<BoundFn>>,
}

#[derive(Clone)]
pub enum PotentialKind {
    /// `U(x) = m |x|^2 / 2`.
    Quadratic {
        m: f64,
    },
    /// `U(x) = beta (x^2 - 1)^2` in one dimension.
    DoubleWell {
        beta: f64,
    },
    Custom(Arc<CustomPotential>),
}

impl fmt::Debug for PotentialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialKind::Quadratic { m } => write!(f, "Quadratic {{ m: {m} }}"),
            PotentialKind::DoubleWell { beta } => write!(f, "DoubleWell {{ beta: {beta} }}"),
            PotentialKind::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// A Poincaré constant with a flag saying whether it was estimated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoincareConstant {
    pub value: f64,
    pub estimated: bool,
}

/// Confining potential `U` of the target `μ(dx) ∝ exp(-U(x)) dx`.
#[derive(Debug, Clone)]
pub struct Potential {
    dim: usize,
    kind: PotentialKind,
    kappa_minus: f64,
    poincare: Option<PoincareConstant>,
    label: String,
}

impl Potential {
    pub fn quadratic(m: f64, dim: usize) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::invalid("m", format!("must be positive and finite, got {m}")));
        }
        if dim == 0 {
            return Err(Error::invalid("d", "dimension must be at least 1"));
        }
        Ok(Self {
            dim,
            kind: PotentialKind::Quadratic { m },
            kappa_minus: 0.0,
            poincare: Some(PoincareConstant { value: m, estimated: false }),
            label: format!("quadratic(m={m}, d={dim})"),
        })
    }

    pub fn double_well(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::invalid("beta", format!("must be positive and finite, got {beta}")));
        }
        Ok(Self {
            dim: 1,
            kind: PotentialKind::DoubleWell { beta },
            // min of U'' = beta (12 x^2 - 4) is -4 beta at x = 0
            kappa_minus: 4.0 * beta,
            poincare: None,
            label: format!("double_well(beta={beta})"),
        })
    }

    /// A potential given by closures. `kappa_minus` must be a valid lower
    /// Hessian bound; it is not checked.
    pub fn custom(dim: usize, kappa_minus: f64, label: impl Into<String>, custom: CustomPotential) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("d", "dimension must be at least 1"));
        }
        if !(kappa_minus >= 0.0) {
            return Err(Error::invalid("kappa_minus", "must be non-negative"));
        }
        Ok(Self {
            dim,
            kind: PotentialKind::Custom(Arc::new(custom)),
            kappa_minus,
            poincare: None,
            label: label.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// κ₋ with `∇²U ⪰ -κ₋ I`.
    pub fn kappa_minus(&self) -> f64 {
        self.kappa_minus
    }

    pub fn poincare_constant(&self) -> Option<PoincareConstant> {
        self.poincare
    }

    /// Attach an estimated Poincaré constant.
    pub fn with_estimated_poincare(mut self, m: f64) -> Self {
        self.poincare = Some(PoincareConstant { value: m, estimated: true });
        self
    }

    /// Mass `m` if the potential is quadratic.
    pub fn quadratic_mass(&self) -> Option<f64> {
        match self.kind {
            PotentialKind::Quadratic { m } => Some(m),
            _ => None,
        }
    }

    pub fn is_gaussian(&self) -> bool {
        self.quadratic_mass().is_some()
    }

    pub fn energy(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match &self.kind {
            PotentialKind::Quadratic { m } => 0.5 * m * x.iter().map(|a| a * a).sum::<f64>(),
            PotentialKind::DoubleWell { beta } => {
                let s = x[0] * x[0] - 1.0;
                beta * s * s
            }
            PotentialKind::Custom(c) => (c.energy)(x),
        }
    }

    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        match &self.kind {
            PotentialKind::Quadratic { m } => {
                for (o, a) in out.iter_mut().zip(x) {
                    *o = m * a;
                }
            }
            PotentialKind::DoubleWell { beta } => {
                out[0] = 4.0 * beta * x[0] * (x[0] * x[0] - 1.0);
            }
            PotentialKind::Custom(c) => (c.gradient)(x, out),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        self.gradient_into(x, &mut g);
        g
    }

    /// Derivative `U'` of a one-dimensional potential.
    pub fn derivative_1d(&self, x: f64) -> f64 {
        let mut g = [0.0];
        self.gradient_into(&[x], &mut g);
        g[0]
    }

    /// Upper bound on `|∇U|` over the closed ball `B(center, radius)`.
    pub fn gradient_norm_bound(&self, center: &[f64], radius: f64) -> Option<f64> {
        let r = center.iter().map(|a| a * a).sum::<f64>().sqrt() + radius;
        match &self.kind {
            PotentialKind::Quadratic { m } => Some(m * r),
            PotentialKind::DoubleWell { beta } => {
                // |x| |x^2 - 1| <= r max(r^2 - 1, 1) on [-r, r]
                Some(4.0 * beta * r * (r * r - 1.0).max(1.0))
            }
            PotentialKind::Custom(c) => c.gradient_bound.as_ref().map(|b| b(center, radius)),
        }
    }

    /// `U(0) - U(1)` for the double well.
    pub fn energy_barrier(&self) -> Option<f64> {
        match self.kind {
            PotentialKind::DoubleWell { .. } => Some(self.energy(&[0.0]) - self.energy(&[1.0])),
            _ => None,
        }
    }
}
