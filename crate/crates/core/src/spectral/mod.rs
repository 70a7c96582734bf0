//! Operator-norm decay, spectral and singular value gaps, relaxation times
//! and total-variation mixing times.
//!
//! Gaussian targets have closed forms ([`gaussian`]); other one-dimensional
//! targets go through Galerkin matrices ([`galerkin`]); the circle chains
//! use exact matrix powers ([`mixing`]); anything else falls back to nested
//! Monte Carlo ([`empirical`]).

pub mod decay;
pub mod empirical;
pub mod galerkin;
pub mod gaussian;
pub mod mixing;

pub use decay::{
    operator_norm_decay, relaxation_time, relaxation_time_on_grid, uniform_grid, DecayCurve, RelaxationTime,
    CROSSING_PRECISION, TRUNCATION_TOLERANCE,
};
pub use empirical::{empirical_decay, EmpiricalConfig};
pub use galerkin::{assemble_galerkin, GalerkinProcess, GeneratorMatrix, DEFAULT_DEGREE, GRAM_TOLERANCE};
pub use gaussian::{
    critical_closed_form, gaussian_drift, gaussian_propagator_norm, gaussian_propagator_norm_m, langevin_gap,
    langevin_gap_m, scale_relaxation,
};
pub use mixing::{tv_mixing_time, worst_tv_distance, MixingTime, DEFAULT_MIXING_CAP};

use serde::{Deserialize, Serialize};

use crate::model::Potential;
use crate::{Provenance, Result};

/// Gap, singular value gap and relaxation times at one truncation degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub degree: usize,
    pub gap: f64,
    pub sing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub process: GalerkinProcess,
    pub potential: String,
    pub gamma: f64,
    pub degree: usize,
    pub gap: f64,
    pub sing: f64,
    pub relaxation: Vec<RelaxationTime>,
    /// Rows for degrees `D` and `D + 4`.
    pub convergence: Vec<ConvergenceRow>,
    /// Largest change of the decay curve between degrees `D` and `D + 4`.
    pub curve_change: f64,
    pub gram_deviation: f64,
    /// All quantities moved by less than [`TRUNCATION_TOLERANCE`].
    pub converged: bool,
    pub provenance: Provenance,
}

/// Full spectral analysis of a Galerkin generator on `grid`.
pub fn spectral_report(
    process: GalerkinProcess,
    pot: &Potential,
    gamma: f64,
    degree: usize,
    grid: &[f64],
    eps: &[f64],
) -> Result<SpectralReport> {
    spectral_analysis(process, pot, gamma, degree, grid, eps).map(|(r, _)| r)
}

/// [`spectral_report`] together with the decay curve it was read from.
pub fn spectral_analysis(
    process: GalerkinProcess,
    pot: &Potential,
    gamma: f64,
    degree: usize,
    grid: &[f64],
    eps: &[f64],
) -> Result<(SpectralReport, DecayCurve)> {
    let g = assemble_galerkin(process, pot, gamma, degree)?;
    let finer = g.refined(4)?;
    let curve = operator_norm_decay(&g, grid)?;
    let relaxation =
        eps.iter().map(|&e| relaxation_time(&curve, e, |t| g.propagator_norm(t))).collect::<Result<Vec<_>>>()?;
    let convergence = vec![
        ConvergenceRow { degree, gap: g.spectral_gap()?, sing: g.singular_value_gap() },
        ConvergenceRow { degree: degree + 4, gap: finer.spectral_gap()?, sing: finer.singular_value_gap() },
    ];
    let curve_change = curve.truncation_change().unwrap_or(0.0);
    let converged = curve.is_converged()
        && (convergence[0].gap - convergence[1].gap).abs() < TRUNCATION_TOLERANCE
        && (convergence[0].sing - convergence[1].sing).abs() < TRUNCATION_TOLERANCE;
    let report = SpectralReport {
        process,
        potential: pot.label().to_string(),
        gamma,
        degree,
        gap: convergence[0].gap,
        sing: convergence[0].sing,
        relaxation,
        convergence,
        curve_change,
        gram_deviation: g.gram_deviation(),
        converged,
        provenance: Provenance::Galerkin,
    };
    Ok((report, curve))
}
