use rand::Rng;
use rand_distr::StandardNormal;

use crate::model::Potential;
use crate::rng::ChainRng;
use crate::{Error, Result};

/// Euler–Maruyama step for `dZ = -½∇U(Z) dt + dB`:
/// `x' = x - (h/2)∇U(x) + √h · noise`.
pub fn overdamped_step(x: &[f64], pot: &Potential, h: f64, noise: &[f64]) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return Err(Error::invalid("h", "step size must be positive"));
    }
    if x.len() != pot.dim() || noise.len() != pot.dim() {
        return Err(Error::invalid("x", "dimension mismatch"));
    }
    let g = pot.gradient(x);
    if g.iter().any(|a| !a.is_finite()) {
        return Err(Error::NonFinite(format!("gradient at {x:?}")));
    }
    let sh = h.sqrt();
    Ok(x.iter().zip(&g).zip(noise).map(|((xi, gi), ni)| xi - 0.5 * h * gi + sh * ni).collect())
}

/// In-place variant drawing its own noise; `grad` is scratch space.
pub fn overdamped_step_in_place(
    x: &mut [f64],
    grad: &mut [f64],
    pot: &Potential,
    h: f64,
    rng: &mut ChainRng,
) -> Result<()> {
    pot.gradient_into(x, grad);
    let sh = h.sqrt();
    for (xi, gi) in x.iter_mut().zip(grad.iter()) {
        if !gi.is_finite() {
            return Err(Error::NonFinite("overdamped gradient".into()));
        }
        let z: f64 = rng.sample(StandardNormal);
        *xi += -0.5 * h * gi + sh * z;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CustomPotential;
    use crate::rng::chain_rng;
    use crate::stats::Moments;

    #[test]
    fn deterministic_step() {
        let pot = Potential::quadratic(1.0, 1).unwrap();
        let x = overdamped_step(&[1.0], &pot, 0.01, &[0.0]).unwrap();
        assert!((x[0] - 0.995).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonpositive_step() {
        let pot = Potential::quadratic(1.0, 1).unwrap();
        assert!(overdamped_step(&[1.0], &pot, 0.0, &[0.0]).is_err());
    }

    #[test]
    fn brownian_variance_grows_linearly() {
        let flat = Potential::custom(
            1,
            0.0,
            "flat",
            CustomPotential { energy: Box::new(|_| 0.0), gradient: Box::new(|_, g| g[0] = 0.0), gradient_bound: None },
        )
        .unwrap();
        let (t, h) = (2.0, 0.05);
        let mut m = Moments::new();
        let mut g = [0.0];
        for c in 0..10_000u64 {
            let mut rng = chain_rng(5, c);
            let mut x = [0.0];
            for _ in 0..(t / h) as usize {
                overdamped_step_in_place(&mut x, &mut g, &flat, h, &mut rng).unwrap();
            }
            m.push(x[0] * x[0]);
        }
        assert!((m.mean() - t).abs() < 3.0 * m.standard_error(), "{} vs {t}", m.mean());
    }

    #[test]
    fn gaussian_stationary_variance() {
        // Discretised OU has stationary variance 1/(1 - h/4).
        let pot = Potential::quadratic(1.0, 1).unwrap();
        let h = 1e-3;
        let expected = 1.0 / (1.0 - h / 4.0);
        let mut batch_means = Vec::new();
        let mut g = [0.0];
        for c in 0..50u64 {
            let mut rng = chain_rng(17, c);
            let mut x = [0.0];
            for _ in 0..5_000 {
                overdamped_step_in_place(&mut x, &mut g, &pot, h, &mut rng).unwrap();
            }
            let mut m = Moments::new();
            for _ in 0..40_000 {
                for _ in 0..10 {
                    overdamped_step_in_place(&mut x, &mut g, &pot, h, &mut rng).unwrap();
                }
                m.push(x[0] * x[0]);
            }
            batch_means.push(m.mean());
        }
        let (mean, se) = crate::stats::batch_mean_se(&batch_means);
        assert!((mean - expected).abs() < 3.0 * se, "{mean} ± {se}");
    }
}
