use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::overdamped_step_in_place;
use crate::model::{TargetMeasure, DEFAULT_NODES};
use crate::rng::chain_rng;
use crate::stats::batch_mean_se;
use crate::{Error, Result};

/// Where stationary position samples come from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StreamSource {
    /// Independent draws from a Gaussian target.
    Exact,
    /// Long overdamped Langevin runs, one per chain.
    Overdamped { step: f64, burn_in: usize, thin: usize },
}

impl StreamSource {
    /// Exact sampling when available, otherwise step 1e−3, burn-in 10⁶, thinning 10.
    pub fn default_for(measure: &TargetMeasure) -> Self {
        if measure.exact_sampling() {
            StreamSource::Exact
        } else {
            StreamSource::Overdamped { step: 1e-3, burn_in: 1_000_000, thin: 10 }
        }
    }
}

/// Samples from `μ̂ = μ ⊗ N(0, I_d)` stored chain-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSamples {
    dim: usize,
    chains: usize,
    per_chain: usize,
    x: Vec<f64>,
    v: Vec<f64>,
}

impl PhaseSamples {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn chains(&self) -> usize {
        self.chains
    }

    pub fn per_chain(&self) -> usize {
        self.per_chain
    }

    pub fn len(&self) -> usize {
        self.chains * self.per_chain
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sample `i` of chain `c` as `(x, v)`.
    pub fn get(&self, c: usize, i: usize) -> (&[f64], &[f64]) {
        let k = (c * self.per_chain + i) * self.dim;
        (&self.x[k..k + self.dim], &self.v[k..k + self.dim])
    }

    pub fn chain(&self, c: usize) -> impl Iterator<Item = (&[f64], &[f64])> + '_ {
        (0..self.per_chain).map(move |i| self.get(c, i))
    }

    /// Chain-wise means of `h(x, v)`.
    pub fn chain_means(&self, mut h: impl FnMut(&[f64], &[f64]) -> f64) -> Vec<f64> {
        (0..self.chains).map(|c| self.chain(c).map(|(x, v)| h(x, v)).sum::<f64>() / self.per_chain as f64).collect()
    }
}

/// Draw `chains × per_chain` samples from `μ̂`. Chain `c` uses stream
/// `(seed, c)`, so the result does not depend on scheduling.
///
/// Markov-chain streams must pass a stationarity gate: the mean and second
/// moment of every coordinate agree with quadrature within 4 standard errors.
pub fn stationary_samples(
    measure: &TargetMeasure,
    source: StreamSource,
    chains: usize,
    per_chain: usize,
    seed: u64,
) -> Result<PhaseSamples> {
    if chains == 0 || per_chain == 0 {
        return Err(Error::invalid("samples", "need at least one chain and one sample"));
    }
    let pot = measure.potential();
    let d = pot.dim();
    let blocks: Vec<(Vec<f64>, Vec<f64>)> = match source {
        StreamSource::Exact => {
            let m = pot
                .quadratic_mass()
                .ok_or_else(|| Error::invalid("source", "exact sampling needs a Gaussian target"))?;
            let sd = 1.0 / m.sqrt();
            (0..chains)
                .into_par_iter()
                .map(|c| {
                    let mut rng = chain_rng(seed, c as u64);
                    let mut x = Vec::with_capacity(per_chain * d);
                    let mut v = Vec::with_capacity(per_chain * d);
                    for _ in 0..per_chain {
                        for _ in 0..d {
                            let z: f64 = rng.sample(StandardNormal);
                            x.push(sd * z);
                        }
                        for _ in 0..d {
                            v.push(rng.sample(StandardNormal));
                        }
                    }
                    (x, v)
                })
                .collect()
        }
        StreamSource::Overdamped { step, burn_in, thin } => {
            if !(step > 0.0) || thin == 0 {
                return Err(Error::invalid("source", "step must be positive and thinning at least 1"));
            }
            if chains < 2 {
                return Err(Error::invalid("chains", "the stationarity gate needs two or more chains"));
            }
            (0..chains)
                .into_par_iter()
                .map(|c| {
                    let mut rng = chain_rng(seed, c as u64);
                    let mut state = vec![0.0; d];
                    let mut grad = vec![0.0; d];
                    for _ in 0..burn_in {
                        overdamped_step_in_place(&mut state, &mut grad, pot, step, &mut rng)?;
                    }
                    let mut x = Vec::with_capacity(per_chain * d);
                    let mut v = Vec::with_capacity(per_chain * d);
                    for _ in 0..per_chain {
                        for _ in 0..thin {
                            overdamped_step_in_place(&mut state, &mut grad, pot, step, &mut rng)?;
                        }
                        x.extend_from_slice(&state);
                        for _ in 0..d {
                            v.push(rng.sample(StandardNormal));
                        }
                    }
                    Ok((x, v))
                })
                .collect::<Result<_>>()?
        }
    };
    let mut samples = PhaseSamples {
        dim: d,
        chains,
        per_chain,
        x: Vec::with_capacity(chains * per_chain * d),
        v: Vec::with_capacity(chains * per_chain * d),
    };
    for (x, v) in blocks {
        samples.x.extend(x);
        samples.v.extend(v);
    }
    if matches!(source, StreamSource::Overdamped { .. }) {
        stationarity_gate(measure, &samples)?;
    }
    Ok(samples)
}

fn stationarity_gate(measure: &TargetMeasure, samples: &PhaseSamples) -> Result<()> {
    let nodes = if samples.dim == 1 { DEFAULT_NODES } else { 40 };
    let quad = measure.quadrature(nodes)?;
    for i in 0..samples.dim {
        for power in [1, 2] {
            let exact = quad.expect(|x| x[i].powi(power));
            let (mean, se) = batch_mean_se(&samples.chain_means(|x, _| x[i].powi(power)));
            if (mean - exact).abs() > 4.0 * se {
                return Err(Error::Stationarity(format!(
                    "coordinate {i}, moment {power}: sample {mean:.5} ± {se:.1e} vs quadrature {exact:.5}"
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Potential;
    use crate::stats::Moments;

    #[test]
    fn velocity_marginal_is_standard_normal() {
        let mu = TargetMeasure::phase_space(Potential::quadratic(2.0, 2).unwrap());
        let s = stationary_samples(&mu, StreamSource::Exact, 4, 25_000, 9).unwrap();
        for i in 0..2 {
            let mv: Moments = (0..4).flat_map(|c| s.chain(c).map(move |(_, v)| v[i])).collect();
            assert!(mv.mean().abs() < 4.0 * mv.standard_error());
            assert!((mv.variance() - 1.0).abs() < 0.02);
            let mx: Moments = (0..4).flat_map(|c| s.chain(c).map(move |(x, _)| x[i])).collect();
            assert!((mx.variance() - 0.5).abs() < 0.01);
        }
    }

    #[test]
    fn overdamped_stream_passes_the_gate() {
        let mu = TargetMeasure::phase_space(Potential::double_well(0.5).unwrap());
        let src = StreamSource::Overdamped { step: 1e-2, burn_in: 2_000, thin: 10 };
        let s = stationary_samples(&mu, src, 16, 2_000, 5).unwrap();
        assert_eq!(s.len(), 32_000);
    }

    #[test]
    fn biased_stream_is_caught() {
        // Far too coarse a step for a stiff double well: the gate must reject it.
        let mu = TargetMeasure::phase_space(Potential::double_well(0.5).unwrap());
        let src = StreamSource::Overdamped { step: 0.2, burn_in: 1_000, thin: 1 };
        let err = stationary_samples(&mu, src, 20, 20_000, 5).unwrap_err();
        assert!(matches!(err, Error::Stationarity(_)), "{err:?}");
    }

    #[test]
    fn streams_are_reproducible() {
        let mu = TargetMeasure::phase_space(Potential::quadratic(1.0, 1).unwrap());
        let a = stationary_samples(&mu, StreamSource::Exact, 3, 10, 1).unwrap();
        let b = stationary_samples(&mu, StreamSource::Exact, 3, 10, 1).unwrap();
        assert_eq!(a, b);
    }
}
