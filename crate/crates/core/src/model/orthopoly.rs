//! Polynomials orthonormal in `L²(μ)` for one-dimensional targets, described
//! by their three-term recurrence
//! `x p_k = b_{k+1} p_{k+1} + a_k p_k + b_k p_{k-1}`.

use nalgebra::DMatrix;

use super::{Potential, Quadrature, TestFunction};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalPolynomials {
    /// `a_0..a_K`
    alpha: Vec<f64>,
    /// `b_0..b_K`, `b_0 = 0`
    beta: Vec<f64>,
    /// Gaussian targets have closed-form ladder matrices.
    gaussian_mass: Option<f64>,
}

impl OrthonormalPolynomials {
    /// Rescaled Hermite polynomials, orthonormal under `N(0, 1/m)`.
    pub fn hermite(m: f64, degree: usize) -> Self {
        let alpha = vec![0.0; degree + 1];
        let beta = (0..=degree).map(|k| (k as f64 / m).sqrt()).collect();
        Self { alpha, beta, gaussian_mass: Some(m) }
    }

    /// Discretised Stieltjes procedure on a one-dimensional quadrature rule.
    pub fn stieltjes(quad: &Quadrature, degree: usize) -> Result<Self> {
        if quad.dim() != 1 {
            return Err(Error::invalid("quadrature", "Stieltjes needs a one-dimensional rule"));
        }
        if degree + 1 > quad.len() {
            return Err(Error::invalid("degree", "exceeds quadrature node count"));
        }
        let (x, w): (Vec<f64>, Vec<f64>) = quad.nodes_1d().unzip();
        let n = x.len();
        let mut alpha = Vec::with_capacity(degree + 1);
        let mut beta = vec![0.0];
        let mut prev = vec![0.0; n];
        let mut cur = vec![1.0; n];
        for k in 0..=degree {
            let a: f64 = (0..n).map(|i| w[i] * x[i] * cur[i] * cur[i]).sum();
            alpha.push(a);
            if k == degree {
                break;
            }
            let bk = beta[k];
            let mut next: Vec<f64> = (0..n).map(|i| (x[i] - a) * cur[i] - bk * prev[i]).collect();
            let norm = (0..n).map(|i| w[i] * next[i] * next[i]).sum::<f64>().sqrt();
            if !(norm > 0.0) || !norm.is_finite() {
                return Err(Error::IllConditionedBasis { degree: k + 1, deviation: f64::NAN });
            }
            next.iter_mut().for_each(|v| *v /= norm);
            beta.push(norm);
            prev = std::mem::replace(&mut cur, next);
        }
        Ok(Self { alpha, beta, gaussian_mass: None })
    }

    /// Orthonormal polynomials for a one-dimensional potential: Hermite for
    /// quadratic `U`, Stieltjes otherwise.
    pub fn for_potential(pot: &Potential, degree: usize, quad: &Quadrature) -> Result<Self> {
        if pot.dim() != 1 {
            return Err(Error::invalid("d", "orthonormal polynomials are one-dimensional"));
        }
        match pot.quadratic_mass() {
            Some(m) => Ok(Self::hermite(m, degree)),
            None => Self::stieltjes(quad, degree),
        }
    }

    pub fn degree(&self) -> usize {
        self.alpha.len() - 1
    }

    pub fn recurrence(&self) -> (&[f64], &[f64]) {
        (&self.alpha, &self.beta)
    }

    /// `p_0(x), ..., p_K(x)`.
    pub fn eval_all(&self, x: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.alpha.len());
        out.push(1.0);
        for k in 0..self.degree() {
            let prev = if k == 0 { 0.0 } else { out[k - 1] };
            out.push(((x - self.alpha[k]) * out[k] - self.beta[k] * prev) / self.beta[k + 1]);
        }
        out
    }

    /// Values and first derivatives of `p_0..p_K` at `x`.
    pub fn eval_with_derivatives(&self, x: f64) -> (Vec<f64>, Vec<f64>) {
        let k_max = self.degree();
        let mut p = vec![1.0; k_max + 1];
        let mut dp = vec![0.0; k_max + 1];
        for k in 0..k_max {
            let (pp, dpp) = if k == 0 { (0.0, 0.0) } else { (p[k - 1], dp[k - 1]) };
            let b = self.beta[k + 1];
            p[k + 1] = ((x - self.alpha[k]) * p[k] - self.beta[k] * pp) / b;
            dp[k + 1] = (p[k] + (x - self.alpha[k]) * dp[k] - self.beta[k] * dpp) / b;
        }
        (p, dp)
    }

    /// Ascending monomial coefficients of each `p_k`.
    pub fn monomial_coefficients(&self) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = vec![vec![1.0]];
        for k in 0..self.degree() {
            let mut next = vec![0.0; k + 2];
            for (i, &c) in out[k].iter().enumerate() {
                next[i + 1] += c;
                next[i] -= self.alpha[k] * c;
            }
            if k > 0 {
                for (i, &c) in out[k - 1].iter().enumerate() {
                    next[i] -= self.beta[k] * c;
                }
            }
            next.iter_mut().for_each(|c| *c /= self.beta[k + 1]);
            out.push(next);
        }
        out
    }

    /// The polynomials as test functions.
    pub fn dictionary(&self) -> Vec<TestFunction> {
        self.monomial_coefficients().iter().map(|c| TestFunction::univariate(c)).collect()
    }

    /// `D[i][j]` = coefficient of `p_i` in `p_j'`, so `p_j' = Σ_i D_ij p_i`.
    /// Exact in the span; obtained by differentiating the recurrence.
    pub fn derivative_matrix(&self) -> DMatrix<f64> {
        let n = self.degree() + 1;
        let mut d = DMatrix::<f64>::zeros(n, n);
        if let Some(m) = self.gaussian_mass {
            for j in 1..n {
                d[(j - 1, j)] = (m * j as f64).sqrt();
            }
            return d;
        }
        // p_{k+1}' = (p_k + (x - a_k) p_k' - b_k p_{k-1}') / b_{k+1}
        for k in 0..n - 1 {
            let mut col = vec![0.0; n];
            col[k] += 1.0;
            for i in 0..n {
                let dk = d[(i, k)];
                if dk == 0.0 {
                    continue;
                }
                // x p_i = b_{i+1} p_{i+1} + a_i p_i + b_i p_{i-1}
                if i + 1 < n {
                    col[i + 1] += self.beta[i + 1] * dk;
                }
                col[i] += (self.alpha[i] - self.alpha[k]) * dk;
                if i > 0 {
                    col[i - 1] += self.beta[i] * dk;
                }
            }
            if k > 0 {
                for i in 0..n {
                    col[i] -= self.beta[k] * d[(i, k - 1)];
                }
            }
            for i in 0..n {
                d[(i, k + 1)] = col[i] / self.beta[k + 1];
            }
        }
        d
    }

    /// `F[i][j] = ⟨p_i, U' p_j⟩_μ`: closed form for Gaussians, quadrature otherwise.
    pub fn force_matrix(&self, pot: &Potential, quad: &Quadrature) -> DMatrix<f64> {
        let n = self.degree() + 1;
        if let Some(m) = self.gaussian_mass {
            let mut f = DMatrix::<f64>::zeros(n, n);
            for j in 1..n {
                let v = (m * j as f64).sqrt();
                f[(j - 1, j)] = v;
                f[(j, j - 1)] = v;
            }
            return f;
        }
        let mut f = DMatrix::<f64>::zeros(n, n);
        for (x, w) in quad.nodes_1d() {
            if w == 0.0 {
                continue;
            }
            let p = self.eval_all(x);
            let du = pot.derivative_1d(x);
            for i in 0..n {
                for j in 0..n {
                    f[(i, j)] += w * du * p[i] * p[j];
                }
            }
        }
        f
    }

    /// Largest deviation of the Gram matrix from the identity under `quad`.
    pub fn gram_deviation(&self, quad: &Quadrature) -> f64 {
        let n = self.degree() + 1;
        let mut g = DMatrix::<f64>::zeros(n, n);
        for (x, w) in quad.nodes_1d() {
            if w == 0.0 {
                continue;
            }
            let p = self.eval_all(x);
            for i in 0..n {
                for j in 0..n {
                    g[(i, j)] += w * p[i] * p[j];
                }
            }
        }
        (g - DMatrix::<f64>::identity(n, n)).amax()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::quadrature::DEFAULT_NODES;

    fn double_well_basis(degree: usize) -> (Potential, Quadrature, OrthonormalPolynomials) {
        let pot = Potential::double_well(0.5).unwrap();
        let q = Quadrature::for_potential(&pot, DEFAULT_NODES).unwrap();
        let b = OrthonormalPolynomials::stieltjes(&q, degree).unwrap();
        (pot, q, b)
    }

    #[test]
    fn stieltjes_on_gaussian_recovers_hermite() {
        let pot = Potential::quadratic(1.0, 1).unwrap();
        let q = Quadrature::for_potential(&pot, 60).unwrap();
        let s = OrthonormalPolynomials::stieltjes(&q, 12).unwrap();
        let h = OrthonormalPolynomials::hermite(1.0, 12);
        for k in 0..=12 {
            assert!(s.recurrence().0[k].abs() < 1e-12);
            assert!((s.recurrence().1[k] - h.recurrence().1[k]).abs() < 1e-11);
        }
    }

    #[test]
    fn double_well_basis_orthonormal_on_refined_rule() {
        let (pot, _, b) = double_well_basis(16);
        let fine = Quadrature::for_potential(&pot, 2 * DEFAULT_NODES).unwrap();
        assert!(b.gram_deviation(&fine) < 1e-10, "{}", b.gram_deviation(&fine));
    }

    #[test]
    fn derivative_matrix_matches_pointwise_derivatives() {
        let (_, _, b) = double_well_basis(10);
        let d = b.derivative_matrix();
        for &x in &[-1.7, -0.2, 0.0, 0.6, 2.1] {
            let (p, dp) = b.eval_with_derivatives(x);
            for j in 0..=10 {
                let recon: f64 = (0..=10).map(|i| d[(i, j)] * p[i]).sum();
                assert!((recon - dp[j]).abs() < 1e-9 * (1.0 + dp[j].abs()), "j={j} x={x}");
            }
        }
    }

    #[test]
    fn force_matrix_is_integration_by_parts_of_derivative() {
        // ⟨p_i, U' p_j⟩ = ⟨p_i', p_j⟩ + ⟨p_i, p_j'⟩, i.e. F = D + Dᵀ
        let (pot, q, b) = double_well_basis(16);
        let f = b.force_matrix(&pot, &q);
        let d = b.derivative_matrix();
        let diff = (&f - (&d + d.transpose())).amax();
        assert!(diff < 1e-8, "{diff}");
    }

    #[test]
    fn hermite_ladders() {
        let b = OrthonormalPolynomials::hermite(4.0, 5);
        let d = b.derivative_matrix();
        assert_eq!(d[(2, 3)], 12f64.sqrt());
        let pot = Potential::quadratic(4.0, 1).unwrap();
        let q = Quadrature::for_potential(&pot, 20).unwrap();
        let f = b.force_matrix(&pot, &q);
        assert_eq!(f, &d + d.transpose());
    }

    #[test]
    fn monomial_coefficients_evaluate_consistently() {
        let (_, _, b) = double_well_basis(6);
        let dict = b.dictionary();
        for &x in &[-1.1, 0.3, 1.9] {
            let p = b.eval_all(x);
            for k in 0..=6 {
                assert!((dict[k].eval(&[x]) - p[k]).abs() < 1e-10 * (1.0 + p[k].abs()));
            }
        }
    }
}
