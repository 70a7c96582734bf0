//! Potentials, target measures, quadrature and polynomial test functions.

mod orthopoly;
mod polynomial;
mod potential;
pub mod quadrature;

pub use orthopoly::OrthonormalPolynomials;
pub use polynomial::{hermite_coefficients, hermite_dictionary, TestFunction};
pub use potential::{CustomPotential, PoincareConstant, Potential, PotentialKind};
pub use quadrature::{gauss_hermite, Quadrature, DEFAULT_NODES};

use crate::{Error, Result};

/// `μ ∝ exp(-U)` on positions, or `μ̂ = μ ⊗ N(0, I_d)` on phase space.
#[derive(Debug, Clone)]
pub struct TargetMeasure {
    potential: Potential,
    phase_space: bool,
}

impl TargetMeasure {
    pub fn position(potential: Potential) -> Self {
        Self { potential, phase_space: false }
    }

    pub fn phase_space(potential: Potential) -> Self {
        Self { potential, phase_space: true }
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn is_phase_space(&self) -> bool {
        self.phase_space
    }

    /// Gaussian targets can be sampled exactly.
    pub fn exact_sampling(&self) -> bool {
        self.potential.is_gaussian()
    }

    /// The position marginal `μ`.
    pub fn marginal(&self) -> TargetMeasure {
        TargetMeasure::position(self.potential.clone())
    }

    pub fn quadrature(&self, nodes_per_dim: usize) -> Result<Quadrature> {
        Quadrature::for_potential(&self.potential, nodes_per_dim)
    }
}

/// Dirichlet form of the overdamped Langevin diffusion,
/// `E(f, g) = ½ ∫ ∇f·∇g dμ`, by deterministic quadrature with
/// `nodes_per_dim` nodes per coordinate.
pub fn dirichlet_form(f: &TestFunction, g: &TestFunction, mu: &TargetMeasure, nodes_per_dim: usize) -> Result<f64> {
    if mu.is_phase_space() {
        return Err(Error::invalid("mu", "Dirichlet form needs the position measure"));
    }
    let quad = mu.quadrature(nodes_per_dim)?;
    dirichlet_form_with(f, g, &quad)
}

/// As [`dirichlet_form`] with a prebuilt rule.
pub fn dirichlet_form_with(f: &TestFunction, g: &TestFunction, quad: &Quadrature) -> Result<f64> {
    let d = quad.dim();
    if f.dim() != d || g.dim() != d {
        return Err(Error::invalid("f, g", "dimension does not match the measure"));
    }
    let mut gf = vec![0.0; d];
    let mut gg = vec![0.0; d];
    let value = 0.5
        * quad.expect(|x| {
            f.gradient_into(x, &mut gf);
            g.gradient_into(x, &mut gg);
            gf.iter().zip(&gg).map(|(a, b)| a * b).sum()
        });
    if !value.is_finite() {
        return Err(Error::NonFinite("Dirichlet form".into()));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gaussian() -> TargetMeasure {
        TargetMeasure::position(Potential::quadratic(1.0, 1).unwrap())
    }

    #[test]
    fn gaussian_examples() {
        let x = TestFunction::univariate(&[0.0, 1.0]);
        let c = TestFunction::constant(1, 3.0);
        let h2 = TestFunction::univariate(&[-1.0, 0.0, 1.0]);
        assert!((dirichlet_form(&x, &x, &gaussian(), 50).unwrap() - 0.5).abs() < 1e-14);
        assert_eq!(dirichlet_form(&x, &c, &gaussian(), 50).unwrap(), 0.0);
        assert!((dirichlet_form(&h2, &h2, &gaussian(), 50).unwrap() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn phase_space_measure_rejected() {
        let x = TestFunction::univariate(&[0.0, 1.0]);
        let mu = TargetMeasure::phase_space(Potential::quadratic(1.0, 1).unwrap());
        assert!(dirichlet_form(&x, &x, &mu, 50).is_err());
    }

    #[test]
    fn unset_resolution_rejected() {
        let x = TestFunction::univariate(&[0.0, 1.0]);
        assert!(dirichlet_form(&x, &x, &gaussian(), 0).is_err());
    }

    #[test]
    fn two_dimensional_gaussian() {
        // f = x0 x1 under N(0, I_2): ½ E[x1² + x0²] = 1
        let mut f = TestFunction::zero(2);
        f.add_term(vec![1, 1], 1.0);
        let mu = TargetMeasure::position(Potential::quadratic(1.0, 2).unwrap());
        assert!((dirichlet_form(&f, &f, &mu, 20).unwrap() - 1.0).abs() < 1e-13);
    }

    fn cubic() -> impl Strategy<Value = TestFunction> {
        prop::collection::vec(-2.0f64..2.0, 4).prop_map(|c| TestFunction::univariate(&c))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn symmetric_bilinear_nonnegative(f in cubic(), g in cubic(), h in cubic(), a in -2.0f64..2.0) {
            let mu = TargetMeasure::position(Potential::double_well(0.5).unwrap());
            let quad = mu.quadrature(DEFAULT_NODES).unwrap();
            let efg = dirichlet_form_with(&f, &g, &quad).unwrap();
            let egf = dirichlet_form_with(&g, &f, &quad).unwrap();
            prop_assert_eq!(efg, egf);
            prop_assert!(dirichlet_form_with(&f, &f, &quad).unwrap() >= 0.0);
            let lhs = dirichlet_form_with(&f.scaled(a).plus(&h), &g, &quad).unwrap();
            let rhs = a * efg + dirichlet_form_with(&h, &g, &quad).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
        }
    }
}
