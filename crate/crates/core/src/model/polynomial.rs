use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Multivariate polynomial observable `f(x)` with exact symbolic gradient.
///
/// Terms are stored as a map from exponent vectors to coefficients; zero
/// coefficients are dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    dim: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl TestFunction {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        let mut f = Self::zero(dim);
        f.add_term(vec![0; dim], c);
        f
    }

    /// The coordinate function `x_i`.
    pub fn coordinate(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] = 1;
        let mut f = Self::zero(dim);
        f.add_term(e, 1.0);
        f
    }

    /// One-dimensional polynomial from ascending coefficients.
    pub fn univariate(coefficients: &[f64]) -> Self {
        let mut f = Self::zero(1);
        for (k, &c) in coefficients.iter().enumerate() {
            f.add_term(vec![k as u32], c);
        }
        f
    }

    /// Embed a univariate polynomial as a function of coordinate `i` in `dim` dimensions.
    pub fn univariate_in(dim: usize, i: usize, coefficients: &[f64]) -> Self {
        let mut f = Self::zero(dim);
        for (k, &c) in coefficients.iter().enumerate() {
            let mut e = vec![0; dim];
            e[i] = k as u32;
            f.add_term(e, c);
        }
        f
    }

    pub fn add_term(&mut self, exponents: Vec<u32>, coefficient: f64) {
        assert_eq!(exponents.len(), self.dim, "exponent vector length");
        if coefficient == 0.0 {
            return;
        }
        match self.terms.entry(exponents) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += coefficient;
                if *o.get() == 0.0 {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(coefficient);
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), *c))
    }

    /// Total degree; 0 for constants and the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum::<u32>()).max().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&k| k == 0))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        self.terms.iter().map(|(e, c)| c * e.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product::<f64>()).sum()
    }

    /// `∂f/∂x_i` by term-wise differentiation.
    pub fn partial(&self, i: usize) -> TestFunction {
        let mut out = TestFunction::zero(self.dim);
        for (e, &c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            out.add_term(e2, c * e[i] as f64);
        }
        out
    }

    /// Symbolic gradient, one polynomial per coordinate.
    pub fn gradient(&self) -> Vec<TestFunction> {
        (0..self.dim).map(|i| self.partial(i)).collect()
    }

    pub fn gradient_at(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        self.gradient_into(x, &mut g);
        g
    }

    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (e, &c) in &self.terms {
            for i in 0..self.dim {
                if e[i] == 0 {
                    continue;
                }
                let mut prod = c * e[i] as f64;
                for (j, (&k, &xj)) in e.iter().zip(x).enumerate() {
                    let k = if j == i { k - 1 } else { k };
                    prod *= xj.powi(k as i32);
                }
                out[i] += prod;
            }
        }
    }

    pub fn scaled(&self, s: f64) -> TestFunction {
        let mut out = TestFunction::zero(self.dim);
        for (e, &c) in &self.terms {
            out.add_term(e.clone(), c * s);
        }
        out
    }

    pub fn plus(&self, other: &TestFunction) -> TestFunction {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.add_term(e.clone(), c);
        }
        out
    }

    pub fn times(&self, other: &TestFunction) -> TestFunction {
        assert_eq!(self.dim, other.dim);
        let mut out = TestFunction::zero(self.dim);
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*x{i}")?,
                    _ => write!(f, "*x{i}^{k}")?,
                }
            }
        }
        Ok(())
    }
}

/// Ascending coefficients of the orthonormal probabilists' Hermite
/// polynomials `He_k / sqrt(k!)` for `k = 0..=degree`.
pub fn hermite_coefficients(degree: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(degree + 1);
    out.push(vec![1.0]);
    if degree >= 1 {
        out.push(vec![0.0, 1.0]);
    }
    // h_{k+1} = (x h_k - sqrt(k) h_{k-1}) / sqrt(k+1)
    for k in 1..degree {
        let mut next = vec![0.0; k + 2];
        for (i, &c) in out[k].iter().enumerate() {
            next[i + 1] += c;
        }
        let sk = (k as f64).sqrt();
        for (i, &c) in out[k - 1].iter().enumerate() {
            next[i] -= sk * c;
        }
        let norm = ((k + 1) as f64).sqrt();
        next.iter_mut().for_each(|c| *c /= norm);
        out.push(next);
    }
    out
}

/// Orthonormal Hermite dictionary in one dimension.
pub fn hermite_dictionary(degree: usize) -> Vec<TestFunction> {
    hermite_coefficients(degree).iter().map(|c| TestFunction::univariate(c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn evaluation_and_gradient() {
        // f = 3 x0^2 x1 - x1 + 2
        let mut f = TestFunction::zero(2);
        f.add_term(vec![2, 1], 3.0);
        f.add_term(vec![0, 1], -1.0);
        f.add_term(vec![0, 0], 2.0);
        assert_eq!(f.eval(&[2.0, 1.5]), 3.0 * 4.0 * 1.5 - 1.5 + 2.0);
        assert_eq!(f.gradient_at(&[2.0, 1.5]), vec![6.0 * 2.0 * 1.5, 3.0 * 4.0 - 1.0]);
        assert_eq!(f.degree(), 3);
    }

    #[test]
    fn cancellation_removes_terms() {
        let f = TestFunction::univariate(&[1.0, 2.0]);
        let g = f.plus(&f.scaled(-1.0));
        assert_eq!(g, TestFunction::zero(1));
        assert!(g.is_constant());
    }

    #[test]
    fn hermite_low_orders() {
        let h = hermite_coefficients(4);
        assert_eq!(h[2], vec![-1.0 / 2f64.sqrt(), 0.0, 1.0 / 2f64.sqrt()]);
        // He_4 = x^4 - 6x^2 + 3, normalised by sqrt(24)
        let s = 24f64.sqrt();
        for (a, b) in h[4].iter().zip([3.0 / s, 0.0, -6.0 / s, 0.0, 1.0 / s]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    fn poly() -> impl Strategy<Value = TestFunction> {
        prop::collection::vec(((0u32..4, 0u32..4), -3.0f64..3.0), 0..6).prop_map(|terms| {
            let mut f = TestFunction::zero(2);
            for ((a, b), c) in terms {
                f.add_term(vec![a, b], c);
            }
            f
        })
    }

    proptest! {
        #[test]
        fn symbolic_gradient_matches_numeric(f in poly(), x in -2.0f64..2.0, y in -2.0f64..2.0) {
            let g = f.gradient_at(&[x, y]);
            let sym: Vec<f64> = f.gradient().iter().map(|p| p.eval(&[x, y])).collect();
            for (a, b) in g.iter().zip(&sym) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
        }

        #[test]
        fn product_rule(f in poly(), g in poly()) {
            // ∂(fg) = f ∂g + g ∂f, checked coefficient-wise
            let lhs = f.times(&g).partial(0);
            let rhs = f.times(&g.partial(0)).plus(&g.times(&f.partial(0)));
            let x = [0.7, -1.3];
            prop_assert!((lhs.eval(&x) - rhs.eval(&x)).abs() <= 1e-9 * (1.0 + lhs.eval(&x).abs()));
        }
    }
}
