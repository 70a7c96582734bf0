//! Galerkin matrices of generators in the tensor basis `φ_j(x) ψ_k(v)`,
//! where `φ_j` are orthonormal in `L²(μ)` and `ψ_k` are the normalised
//! probabilists' Hermite polynomials, orthonormal under `N(0, 1)`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::linalg::{decoupled_blocks, eigenvalues, expm, min_singular_value, spectral_norm, submatrix};
use crate::model::{OrthonormalPolynomials, Potential, Quadrature, DEFAULT_NODES};
use crate::samplers::Process;
use crate::{Error, Result};

/// Largest Gram deviation accepted for the position basis.
pub const GRAM_TOLERANCE: f64 = 1e-8;

/// Default truncation degree per coordinate.
pub const DEFAULT_DEGREE: usize = 16;

/// Processes whose generators are polynomial-preserving.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GalerkinProcess {
    Overdamped,
    Langevin,
    Rhmc,
}

impl GalerkinProcess {
    pub fn as_str(self) -> &'static str {
        match self {
            GalerkinProcess::Overdamped => "overdamped",
            GalerkinProcess::Langevin => "langevin",
            GalerkinProcess::Rhmc => "rhmc",
        }
    }

    pub fn is_lift(self) -> bool {
        self != GalerkinProcess::Overdamped
    }
}

impl fmt::Display for GalerkinProcess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl TryFrom<Process> for GalerkinProcess {
    type Error = Error;

    fn try_from(p: Process) -> Result<Self> {
        match p {
            Process::Overdamped => Ok(GalerkinProcess::Overdamped),
            Process::Langevin => Ok(GalerkinProcess::Langevin),
            Process::Rhmc => Ok(GalerkinProcess::Rhmc),
            other => Err(Error::invalid(
                "process",
                format!("no Galerkin matrix for `{other}` (available: overdamped, langevin, rhmc)"),
            )),
        }
    }
}

impl FromStr for GalerkinProcess {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.parse::<Process>()?.try_into()
    }
}

/// Generator matrix `G[a][b] = ⟨e_a, L e_b⟩` on an orthonormal basis of
/// mean-zero functions. Stored together with its decoupled diagonal blocks,
/// which is where all spectral computations happen.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    matrix: DMatrix<f64>,
    /// `(x-degree, v-degree)` of each basis function; the v-degree is 0 for
    /// the overdamped generator.
    basis: Vec<(usize, usize)>,
    degree: usize,
    process: GalerkinProcess,
    gamma: f64,
    potential: Potential,
    gram_deviation: f64,
    blocks: Vec<Vec<usize>>,
    block_matrices: Vec<DMatrix<f64>>,
}

/// Assemble the generator of `process` for the one-dimensional potential
/// `pot`, truncated at `degree` in each coordinate.
pub fn assemble_galerkin(
    process: GalerkinProcess,
    pot: &Potential,
    gamma: f64,
    degree: usize,
) -> Result<GeneratorMatrix> {
    if pot.dim() != 1 {
        return Err(Error::invalid("potential", "Galerkin matrices are one-dimensional"));
    }
    if degree < 2 {
        return Err(Error::invalid("degree", "truncation degree must be at least 2"));
    }
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::invalid("gamma", "must be non-negative"));
    }
    let quad = Quadrature::for_potential(pot, DEFAULT_NODES.max(4 * degree))?;
    let phi = OrthonormalPolynomials::for_potential(pot, degree, &quad)?;
    let gram_deviation = if pot.is_gaussian() {
        0.0
    } else {
        // Stieltjes is orthonormal on its own rule by construction, so check
        // on a rule twice as fine.
        let fine = Quadrature::for_potential(pot, 2 * quad.nodes_per_dim())?;
        let dev = phi.gram_deviation(&fine);
        if !(dev <= GRAM_TOLERANCE) {
            return Err(Error::IllConditionedBasis { degree, deviation: dev });
        }
        dev
    };
    let d = phi.derivative_matrix();
    let n = degree + 1;

    let (matrix, basis) = match process {
        GalerkinProcess::Overdamped => {
            // ⟨φ_i, Lφ_j⟩ = -½⟨φ_i', φ_j'⟩ = -½ (DᵀD)_ij
            let dtd = d.transpose() * &d;
            let basis: Vec<(usize, usize)> = (1..n).map(|j| (j, 0)).collect();
            let g = DMatrix::from_fn(n - 1, n - 1, |a, b| -0.5 * dtd[(a + 1, b + 1)]);
            (g, basis)
        }
        GalerkinProcess::Langevin | GalerkinProcess::Rhmc => {
            let f = phi.force_matrix(pot, &quad);
            let basis: Vec<(usize, usize)> =
                (0..n).flat_map(|j| (0..n).map(move |k| (j, k))).filter(|&jk| jk != (0, 0)).collect();
            let index = |j: usize, k: usize| j * n + k - 1;
            let mut g = DMatrix::<f64>::zeros(basis.len(), basis.len());
            // L(φ_j ψ_k) = φ_j' vψ_k - U'φ_j ψ_k' + velocity part, with
            // vψ_k = √(k+1)ψ_{k+1} + √k ψ_{k-1} and ψ_k' = √k ψ_{k-1}.
            for (col, &(j, k)) in basis.iter().enumerate() {
                let sk = (k as f64).sqrt();
                for i in 0..n {
                    if k + 1 < n {
                        let v = d[(i, j)] * ((k + 1) as f64).sqrt();
                        if (i, k + 1) != (0, 0) && v != 0.0 {
                            g[(index(i, k + 1), col)] += v;
                        }
                    }
                    if k >= 1 && (i, k - 1) != (0, 0) {
                        let v = d[(i, j)] * sk - f[(i, j)] * sk;
                        if v != 0.0 {
                            g[(index(i, k - 1), col)] += v;
                        }
                    }
                }
                let damping = match process {
                    GalerkinProcess::Langevin => gamma * k as f64,
                    _ if k >= 1 => gamma,
                    _ => 0.0,
                };
                g[(col, col)] -= damping;
            }
            (g, basis)
        }
    };

    Ok(GeneratorMatrix::from_parts(matrix, basis, degree, process, gamma, pot.clone(), gram_deviation))
}

impl GeneratorMatrix {
    fn from_parts(
        matrix: DMatrix<f64>,
        basis: Vec<(usize, usize)>,
        degree: usize,
        process: GalerkinProcess,
        gamma: f64,
        potential: Potential,
        gram_deviation: f64,
    ) -> Self {
        // Entries that vanish by symmetry (parity for even potentials) come
        // out of quadrature as rounding noise; clear them so the blocks split.
        let mut matrix = matrix;
        let floor = 1e-14 * matrix.amax();
        matrix.iter_mut().filter(|v| v.abs() < floor).for_each(|v| *v = 0.0);
        let blocks = decoupled_blocks(&matrix);
        let block_matrices = blocks.iter().map(|b| submatrix(&matrix, b)).collect();
        Self { matrix, basis, degree, process, gamma, potential, gram_deviation, blocks, block_matrices }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn basis(&self) -> &[(usize, usize)] {
        &self.basis
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn process(&self) -> GalerkinProcess {
        self.process
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    /// Gram deviation of the position basis on a refined rule.
    pub fn gram_deviation(&self) -> f64 {
        self.gram_deviation
    }

    /// Index sets of the invariant coordinate blocks.
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// The same generator at truncation `degree + extra`.
    pub fn refined(&self, extra: usize) -> Result<GeneratorMatrix> {
        assemble_galerkin(self.process, &self.potential, self.gamma, self.degree + extra)
    }

    /// `c · G`, same basis.
    pub fn scaled(&self, c: f64) -> GeneratorMatrix {
        let mut out = self.clone();
        out.matrix *= c;
        out.block_matrices.iter_mut().for_each(|b| *b *= c);
        out
    }

    /// Principal submatrix on the given `(x-degree, v-degree)` pairs.
    pub fn restriction(&self, elements: &[(usize, usize)]) -> Option<DMatrix<f64>> {
        let idx: Option<Vec<usize>> = elements.iter().map(|e| self.basis.iter().position(|b| b == e)).collect();
        idx.map(|i| submatrix(&self.matrix, &i))
    }

    /// `‖exp(tG)‖`, the largest singular value over the blocks.
    pub fn propagator_norm(&self, t: f64) -> Result<f64> {
        let mut best: f64 = 0.0;
        for b in &self.block_matrices {
            best = best.max(spectral_norm(&expm(&(b * t))?));
        }
        Ok(best)
    }

    /// `‖exp(tG)‖` on a whole grid. Uniform grids propagate by repeated
    /// multiplication with `exp(ΔG)`; others evaluate each point directly.
    pub fn propagator_norms(&self, times: &[f64]) -> Result<Vec<f64>> {
        if times.is_empty() {
            return Ok(Vec::new());
        }
        let per_block: Vec<Vec<f64>> =
            self.block_matrices.par_iter().map(|b| block_norms(b, times)).collect::<Result<_>>()?;
        Ok((0..times.len()).map(|i| per_block.iter().map(|v| v[i]).fold(0.0, f64::max)).collect())
    }

    /// All eigenvalues as `(re, im)`.
    pub fn eigenvalues(&self) -> Result<Vec<(f64, f64)>> {
        let per_block = self.block_matrices.iter().map(eigenvalues).collect::<Result<Vec<_>>>()?;
        Ok(per_block.into_iter().flatten().collect())
    }

    /// `gap = inf Re(-λ)` over the computed spectrum.
    pub fn spectral_gap(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.iter().map(|e| -e.0).fold(f64::INFINITY, f64::min))
    }

    /// Smallest singular value of `G`.
    pub fn singular_value_gap(&self) -> f64 {
        self.block_matrices.iter().map(min_singular_value).fold(f64::INFINITY, f64::min)
    }
}

fn is_uniform(times: &[f64]) -> bool {
    if times.len() < 3 {
        return false;
    }
    let dt = times[1] - times[0];
    times.windows(2).all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.abs().max(1e-300))
}

fn block_norms(b: &DMatrix<f64>, times: &[f64]) -> Result<Vec<f64>> {
    if !is_uniform(times) {
        return times.iter().map(|&t| Ok(spectral_norm(&expm(&(b * t))?))).collect();
    }
    let dt = times[1] - times[0];
    let step = expm(&(b * dt))?;
    let mut p = expm(&(b * times[0]))?;
    let mut out = Vec::with_capacity(times.len());
    out.push(spectral_norm(&p));
    for (i, &t) in times.iter().enumerate().skip(1) {
        // re-anchor periodically so rounding cannot accumulate
        p = if i % 256 == 0 { expm(&(b * t))? } else { &p * &step };
        out.push(spectral_norm(&p));
    }
    Ok(out)
}
