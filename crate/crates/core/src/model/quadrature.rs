use nalgebra::{DMatrix, SymmetricEigen};

use super::potential::{Potential, PotentialKind};
use crate::{Error, Result};

/// Default Gauss–Hermite node count per dimension.
pub const DEFAULT_NODES: usize = 200;

/// Gauss–Hermite rule for the standard normal weight: nodes and weights
/// summing to one. Nodes come from the Golub–Welsch eigenproblem; weights
/// from the Christoffel function `1 / Σ_k h_k(x)^2`, which stays accurate
/// in the far tails where eigenvector components underflow.
pub fn gauss_hermite(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::Quadrature("node count must be positive".into()));
    }
    let jacobi = DMatrix::from_fn(n, n, |i, j| if i + 1 == j || j + 1 == i { (i.max(j) as f64).sqrt() } else { 0.0 });
    let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    nodes.sort_by(f64::total_cmp);
    // symmetrise: the rule is exactly symmetric about zero
    for i in 0..n / 2 {
        let a = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        nodes[i] = -a;
        nodes[n - 1 - i] = a;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    let weights: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            let (mut prev, mut cur) = (0.0, 1.0);
            let mut sum = 1.0;
            for k in 1..n {
                let next = (x * cur - ((k - 1) as f64).sqrt() * prev) / (k as f64).sqrt();
                prev = cur;
                cur = next;
                sum += cur * cur;
            }
            1.0 / sum
        })
        .collect();
    let total: f64 = weights.iter().sum();
    Ok((nodes, weights.into_iter().map(|w| w / total).collect()))
}

/// Deterministic quadrature against a target `μ ∝ exp(-U)`.
///
/// Quadratic potentials use rescaled Gauss–Hermite nodes (exact for
/// polynomials up to degree `2n-1`). Other potentials reuse the standard
/// nodes reweighted by `exp(-U(x) + |x|^2/2)`; the normalising constant is
/// computed with the same rule and cached.
#[derive(Debug, Clone)]
pub struct Quadrature {
    dim: usize,
    nodes_per_dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
    log_normalizer: f64,
}

impl Quadrature {
    pub fn for_potential(pot: &Potential, nodes_per_dim: usize) -> Result<Self> {
        if nodes_per_dim == 0 {
            return Err(Error::Quadrature("quadrature resolution not set".into()));
        }
        let dim = pot.dim();
        let total = nodes_per_dim
            .checked_pow(dim as u32)
            .filter(|&t| t <= 50_000_000)
            .ok_or_else(|| Error::Quadrature(format!("{nodes_per_dim}^{dim} nodes is too many")))?;
        let (z, w) = gauss_hermite(nodes_per_dim)?;
        let mut points = Vec::with_capacity(total * dim);
        let mut base_weights = Vec::with_capacity(total);
        let mut idx = vec![0usize; dim];
        for _ in 0..total {
            let mut wt = 1.0;
            for &i in &idx {
                points.push(z[i]);
                wt *= w[i];
            }
            base_weights.push(wt);
            for slot in idx.iter_mut() {
                *slot += 1;
                if *slot < nodes_per_dim {
                    break;
                }
                *slot = 0;
            }
        }
        let half_log_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();

        if let PotentialKind::Quadratic { m } = pot.kind() {
            let s = 1.0 / m.sqrt();
            points.iter_mut().for_each(|p| *p *= s);
            return Ok(Self {
                dim,
                nodes_per_dim,
                points,
                weights: base_weights,
                log_normalizer: dim as f64 * (half_log_2pi - 0.5 * m.ln()),
            });
        }

        // A unit-width base rule wastes most nodes on the tails of targets
        // that are narrower than N(0, 1). Measure the RMS width with it, then
        // rebuild on N(0, s²) with s half that width, widening if the tails
        // turn out unresolved.
        let pilot = reweight(pot, &points, &base_weights, 1.0, z[nodes_per_dim - 1]);
        let rms = pilot.as_ref().ok().map(|(_, w, _)| {
            let second: f64 = w
                .iter()
                .enumerate()
                .map(|(i, wi)| wi * points[i * dim..(i + 1) * dim].iter().map(|a| a * a).sum::<f64>())
                .sum();
            (second / dim as f64).sqrt()
        });
        let mut last_err = None;
        for s in rms.into_iter().flat_map(|r| [0.5 * r, r]).chain([1.0]) {
            if !(s > 0.0 && s.is_finite()) {
                continue;
            }
            let scaled: Vec<f64> = points.iter().map(|p| p * s).collect();
            match reweight(pot, &scaled, &base_weights, s, s * z[nodes_per_dim - 1]) {
                Ok((points, weights, log_z)) => {
                    return Ok(Self { dim, nodes_per_dim, points, weights, log_normalizer: log_z })
                }
                Err(e) => last_err = Some(e),
            }
        }
        Err(last_err.unwrap_or_else(|| Error::Quadrature("measure is not normalisable on the nodes".into())))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes_per_dim(&self) -> usize {
        self.nodes_per_dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// `log ∫ exp(-U(x)) dx`.
    pub fn log_normalizer(&self) -> f64 {
        self.log_normalizer
    }

    /// `∫ f dμ`.
    pub fn expect(&self, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        (0..self.len()).filter(|&i| self.weights[i] > 0.0).map(|i| self.weights[i] * f(self.point(i))).sum()
    }

    /// Node/weight pairs of a one-dimensional rule.
    pub fn nodes_1d(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        assert_eq!(self.dim, 1, "nodes_1d on a multivariate rule");
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Reweight a Gauss–Hermite rule for `N(0, s²)` (nodes already scaled) to
/// `exp(-U)`. Returns the points, normalised weights and `log Z`.
fn reweight(
    pot: &Potential,
    points: &[f64],
    base_weights: &[f64],
    s: f64,
    outermost: f64,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let dim = pot.dim();
    let log_w: Vec<f64> = base_weights
        .iter()
        .enumerate()
        .map(|(i, &bw)| {
            let x = &points[i * dim..(i + 1) * dim];
            let sq: f64 = x.iter().map(|a| a * a).sum();
            bw.ln() - pot.energy(x) + 0.5 * sq / (s * s)
        })
        .collect();
    let max = log_w.iter().copied().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::Quadrature("measure is not normalisable on the nodes".into()));
    }
    let sum: f64 = log_w.iter().map(|l| (l - max).exp()).sum();
    let half_log_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
    let log_z = max + sum.ln() + dim as f64 * (half_log_2pi + s.ln());
    let weights: Vec<f64> = log_w.iter().map(|l| (l - max).exp() / sum).collect();

    // Mass on the outer tenth of the node range must be negligible,
    // otherwise the tails are unresolved (or μ is not normalisable).
    let edge = 0.9 * outermost;
    let tail: f64 = weights
        .iter()
        .enumerate()
        .filter(|(i, _)| points[i * dim..(i + 1) * dim].iter().any(|a| a.abs() >= edge))
        .map(|(_, w)| w)
        .sum();
    if tail > 1e-12 || !log_z.is_finite() {
        return Err(Error::Quadrature(format!(
            "tail mass {tail:.3e} on outer nodes: measure not normalisable or tails unresolved"
        )));
    }
    Ok((points.to_vec(), weights, log_z))
}
