//! Monte Carlo verification of the second-order lift identities
//!
//! ```text
//! ∫ L̂(f∘π) (g∘π) dμ̂ = 0,      ½ ∫ L̂(f∘π) L̂(g∘π) dμ̂ = E(f, g),
//! ```
//!
//! where `E` is the Dirichlet form of the overdamped Langevin diffusion.
//! On position-only functions every implemented lift acts as
//! `L̂(f∘π)(x, v) = v·∇f(x)`: Ornstein–Uhlenbeck noise, refreshment and
//! bounces only move `v`. The estimates therefore depend on the process
//! only through the sample stream, which is shared.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{
    dirichlet_form_with, OrthonormalPolynomials, Potential, Quadrature, TargetMeasure, TestFunction, DEFAULT_NODES,
};
use crate::samplers::{stationary_samples, PhaseSamples, PhaseState, Process, StreamSource};
use crate::stats::batch_mean_se;
use crate::{Error, Provenance, Result};

/// Default pass threshold in standard errors.
pub const DEFAULT_K: f64 = 4.0;

/// `L̂(f∘π)(x, v) = v·∇f(x)`.
pub fn apply_lifted_generator(f: &TestFunction, s: &PhaseState) -> f64 {
    lifted_at(f, &s.x, &s.v)
}

fn lifted_at(f: &TestFunction, x: &[f64], v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    f.gradient_at(x).iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    /// `|value − target| ≤ k·SE`.
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.se
    }
}

/// One `(f, g)` pair of a dictionary check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftEntry {
    pub f: String,
    pub g: String,
    pub first_order: Estimate,
    pub second_order: Estimate,
    /// `E(f, g)` by quadrature.
    pub dirichlet: f64,
    pub first_pass: bool,
    pub second_pass: bool,
}

impl LiftEntry {
    pub fn passed(&self) -> bool {
        self.first_pass && self.second_pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftReport {
    pub process: Process,
    pub potential: String,
    pub max_degree: usize,
    pub samples: usize,
    pub chains: usize,
    pub k: f64,
    /// `exact` for independent Gaussian draws, `overdamped` for MCMC streams.
    pub stream: String,
    pub entries: Vec<LiftEntry>,
    pub passed: bool,
    pub provenance: Provenance,
}

/// First-order estimate `mean[(v·∇f(x)) g(x)]`; SE from chain means.
pub fn first_order_estimate(f: &TestFunction, g: &TestFunction, samples: &PhaseSamples) -> Estimate {
    estimate(samples, |x, v| lifted_at(f, x, v) * g.eval(x))
}

/// Second-order estimate `½ mean[(v·∇f(x)) (v·∇g(x))]`; SE from chain means.
pub fn second_order_estimate(f: &TestFunction, g: &TestFunction, samples: &PhaseSamples) -> Estimate {
    estimate(samples, |x, v| 0.5 * (lifted_at(f, x, v) * lifted_at(g, x, v)))
}

fn estimate(samples: &PhaseSamples, h: impl FnMut(&[f64], &[f64]) -> f64) -> Estimate {
    let (value, se) = batch_mean_se(&samples.chain_means(h));
    Estimate { value, se }
}

/// Settings shared by the checks.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftCheckConfig {
    pub samples: usize,
    pub chains: usize,
    pub seed: u64,
    pub k: f64,
    /// Defaults to exact sampling for Gaussian targets and the overdamped
    /// sampler (step 1e−3, burn-in 10⁶, thinning 10) otherwise.
    pub source: Option<StreamSource>,
}

impl Default for LiftCheckConfig {
    fn default() -> Self {
        Self { samples: 1_000_000, chains: 100, seed: 0, k: DEFAULT_K, source: None }
    }
}

impl LiftCheckConfig {
    fn stream(&self, measure: &TargetMeasure) -> Result<PhaseSamples> {
        if self.chains < 2 {
            return Err(Error::invalid("chains", "standard errors need at least two chains"));
        }
        if self.samples < self.chains {
            return Err(Error::invalid("samples", "need at least one sample per chain"));
        }
        if !(self.k > 0.0) {
            return Err(Error::invalid("k", "threshold must be positive"));
        }
        let measure = TargetMeasure::phase_space(measure.potential().clone());
        let source = self.source.unwrap_or_else(|| StreamSource::default_for(&measure));
        stationary_samples(&measure, source, self.chains, self.samples.div_ceil(self.chains), self.seed)
    }
}

fn quadrature_for(pot: &Potential, degree: usize) -> Result<Quadrature> {
    let nodes = if pot.dim() == 1 {
        DEFAULT_NODES
    } else if pot.is_gaussian() {
        // exact for the polynomial integrands of a degree-`degree` dictionary
        degree + 2
    } else {
        40
    };
    Quadrature::for_potential(pot, nodes)
}

/// Check the first-order identity for one pair on a fresh sample stream.
pub fn check_first_order(
    f: &TestFunction,
    g: &TestFunction,
    measure: &TargetMeasure,
    config: &LiftCheckConfig,
) -> Result<LiftEntry> {
    check_pair(f, g, measure, config)
}

/// Check the second-order identity for one pair on a fresh sample stream.
pub fn check_second_order(
    f: &TestFunction,
    g: &TestFunction,
    measure: &TargetMeasure,
    config: &LiftCheckConfig,
) -> Result<LiftEntry> {
    check_pair(f, g, measure, config)
}

fn check_pair(
    f: &TestFunction,
    g: &TestFunction,
    measure: &TargetMeasure,
    config: &LiftCheckConfig,
) -> Result<LiftEntry> {
    let pot = measure.potential();
    let quad = quadrature_for(pot, f.degree().max(g.degree()) as usize)?;
    let samples = config.stream(measure)?;
    let first = first_order_estimate(f, g, &samples);
    let second = second_order_estimate(f, g, &samples);
    let dirichlet = dirichlet_form_with(f, g, &quad)?;
    Ok(LiftEntry {
        f: f.to_string(),
        g: g.to_string(),
        first_pass: first.agrees_with(0.0, config.k),
        second_pass: second.agrees_with(dirichlet, config.k),
        first_order: first,
        second_order: second,
        dirichlet,
    })
}

/// Orthonormal polynomial dictionary up to `max_degree`: Hermite for
/// Gaussian targets (tensor products of total degree ≤ `max_degree` when
/// `d > 1`), Stieltjes polynomials for one-dimensional non-Gaussian targets.
pub fn dictionary(pot: &Potential, max_degree: usize) -> Result<Vec<TestFunction>> {
    let d = pot.dim();
    if d == 1 {
        let quad = quadrature_for(pot, max_degree)?;
        return Ok(OrthonormalPolynomials::for_potential(pot, max_degree, &quad)?.dictionary());
    }
    let m = pot
        .quadratic_mass()
        .ok_or_else(|| Error::invalid("potential", "multivariate dictionaries need a Gaussian target"))?;
    let coeffs = OrthonormalPolynomials::hermite(m, max_degree).monomial_coefficients();
    let mut out = Vec::new();
    let mut idx = vec![0usize; d];
    loop {
        if idx.iter().sum::<usize>() <= max_degree {
            let f = idx.iter().enumerate().fold(TestFunction::constant(d, 1.0), |acc, (i, &k)| {
                acc.times(&TestFunction::univariate_in(d, i, &coeffs[k]))
            });
            out.push(f);
        }
        let mut i = 0;
        loop {
            if i == d {
                return Ok(out);
            }
            idx[i] += 1;
            if idx[i] <= max_degree {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// Per-chain sums of the first- and second-order products, row-major.
type ChainSums = (Vec<f64>, Vec<f64>);

/// Check every ordered pair of the dictionary up to `max_degree` on one
/// shared sample stream.
pub fn run_dictionary(
    process: Process,
    measure: &TargetMeasure,
    max_degree: usize,
    config: &LiftCheckConfig,
) -> Result<LiftReport> {
    if !process.is_lift() {
        return Err(Error::invalid("process", "the overdamped diffusion is the base process, not a lift"));
    }
    let pot = measure.potential();
    let dict = dictionary(pot, max_degree)?;
    let quad = quadrature_for(pot, max_degree)?;
    let samples = config.stream(measure)?;
    let n = dict.len();
    let d = pot.dim();

    // Per chain: sums of a_i b_j and ½ a_i a_j with a_i = v·∇f_i, b_j = f_j.
    let chain_sums: Vec<ChainSums> = (0..samples.chains())
        .into_par_iter()
        .map(|c| {
            let mut first = vec![0.0; n * n];
            let mut second = vec![0.0; n * n];
            let mut a = vec![0.0; n];
            let mut b = vec![0.0; n];
            let mut grad = vec![0.0; d];
            for (x, v) in samples.chain(c) {
                for (i, f) in dict.iter().enumerate() {
                    f.gradient_into(x, &mut grad);
                    a[i] = grad.iter().zip(v).map(|(p, q)| p * q).sum();
                    b[i] = f.eval(x);
                }
                for i in 0..n {
                    for j in 0..n {
                        first[i * n + j] += a[i] * b[j];
                        second[i * n + j] += 0.5 * (a[i] * a[j]);
                    }
                }
            }
            (first, second)
        })
        .collect();

    let per = samples.per_chain() as f64;
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let est = |pick: &dyn Fn(&ChainSums) -> f64| {
                let means: Vec<f64> = chain_sums.iter().map(|s| pick(s) / per).collect();
                let (value, se) = batch_mean_se(&means);
                Estimate { value, se }
            };
            let first = est(&|s| s.0[i * n + j]);
            let second = est(&|s| s.1[i * n + j]);
            let dirichlet = dirichlet_form_with(&dict[i], &dict[j], &quad)?;
            entries.push(LiftEntry {
                f: dict[i].to_string(),
                g: dict[j].to_string(),
                first_pass: first.agrees_with(0.0, config.k),
                second_pass: second.agrees_with(dirichlet, config.k),
                first_order: first,
                second_order: second,
                dirichlet,
            });
        }
    }
    let source = config.source.unwrap_or_else(|| StreamSource::default_for(measure));
    Ok(LiftReport {
        process,
        potential: pot.label().to_string(),
        max_degree,
        samples: samples.len(),
        chains: samples.chains(),
        k: config.k,
        stream: match source {
            StreamSource::Exact => "exact".into(),
            StreamSource::Overdamped { .. } => "overdamped".into(),
        },
        passed: entries.iter().all(LiftEntry::passed),
        entries,
        provenance: Provenance::MonteCarlo,
    })
}
