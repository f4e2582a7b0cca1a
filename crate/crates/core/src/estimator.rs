//! Admissible stress recovery and the constitutive relation error bound.

use crate::elasticity::{energy_sigma_squared_with, FeSolution, Material, ProblemDef};
use crate::local_solver::{solve_local_neumann, BodyLoad, ElementLocalSpace, ElementStress, LocalError};
use crate::math;
use crate::mesh::{Mesh, Topology};
use crate::pipeline::Mapper;
use crate::standard_tractions::{Provenance, TractionField};
use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EstimateError {
    #[error(transparent)]
    Local(#[from] LocalError),
    #[error("effectivity is undefined for a zero reference error")]
    ZeroReference,
    #[error("estimate ratio is undefined when every contribution vanishes")]
    DegenerateRatio,
    #[error("efficiency factor is undefined when the run time equals the standard run time")]
    EqualTimes,
}

/// Element-wise polynomial stress rebuilt from equilibrated tractions.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibleStress {
    pub stresses: Vec<ElementStress>,
    /// Weak equilibrium residual of each local solve, relative to its load.
    pub residuals: Vec<f64>,
    pub provenance: Provenance,
    /// Human-readable description of the selection for enhanced fields.
    pub selection: Option<String>,
}

impl AdmissibleStress {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, v| m.max(*v))
    }
}

/// Solves the local Neumann problem of every element with data `(ηF̂, f_d)`.
pub fn recover_admissible_stress<M: Mapper>(
    mesh: &Mesh,
    topo: &Topology,
    tractions: &TractionField,
    prob: &ProblemDef,
    extra_degree: usize,
    mapper: &M,
) -> Result<AdmissibleStress, EstimateError> {
    let body = BodyLoad::constant(prob.body_force);
    let results = mapper.map(mesh.n_elements(), &|e| {
        let space = ElementLocalSpace::new(mesh, e, &prob.material, extra_degree)?;
        let t = tractions.element_traction(mesh, topo, e);
        solve_local_neumann(&space, &t, &body)
    });
    let mut stresses = Vec::with_capacity(results.len());
    let mut residuals = Vec::with_capacity(results.len());
    for r in results {
        let s = r?;
        residuals.push(s.residual);
        stresses.push(s.stress);
    }
    Ok(AdmissibleStress { stresses, residuals, provenance: tractions.provenance, selection: None })
}

/// Global estimate and its element-wise breakdown.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ErrorReport {
    /// `θ = (Σ θ_E²)^½`.
    pub theta: f64,
    /// `θ_E` per element.
    pub contributions: Vec<f64>,
    /// `θ_E² / |E|` per element.
    pub densities: Vec<f64>,
    pub reference_error: Option<f64>,
    pub effectivity: Option<f64>,
    /// Wall-clock seconds per named phase.
    pub timings: Vec<(String, f64)>,
    /// Total time divided by the standard run time.
    pub normalized_cpu: Option<f64>,
    pub efficiency: Option<Efficiency>,
}

impl ErrorReport {
    pub fn total_time(&self) -> f64 {
        self.timings.iter().map(|(_, t)| t).sum()
    }
}

/// `θ_E² = ∫_E (σ̂ − σ_h) : K⁻¹ (σ̂ − σ_h)` per element, integrated exactly.
pub fn squared_contributions(mesh: &Mesh, adm: &AdmissibleStress, fe: &FeSolution, material: &Material) -> Vec<f64> {
    let degree = adm.stresses.iter().map(|s| s.degree).max().unwrap_or(0);
    energy_sigma_squared_with(mesh, material, 2 * degree, |e, l| adm.stresses[e].eval(l).sub(&fe.stress[e]))
}

/// Constitutive relation error `θ = ‖σ̂ − K ε(u_h)‖_σ` with its contributions and densities.
pub fn cre_estimate(mesh: &Mesh, adm: &AdmissibleStress, fe: &FeSolution, material: &Material) -> ErrorReport {
    let sq = squared_contributions(mesh, adm, fe, material);
    let theta = math::sqrt(sq.iter().sum());
    let densities = sq.iter().enumerate().map(|(e, v)| v / mesh.measure(e)).collect();
    let contributions = sq.iter().map(|v| math::sqrt(v.max(0.0))).collect();
    ErrorReport { theta, contributions, densities, ..ErrorReport::default() }
}

/// Effectivity index `θ / ‖e_h‖`.
pub fn effectivity(theta: f64, reference_error: f64) -> Result<f64, EstimateError> {
    if reference_error == 0.0 {
        return Err(EstimateError::ZeroReference);
    }
    Ok(theta / reference_error)
}

/// `θ_E² / max θ_E²` per element.
pub fn estimate_ratio(contributions: &[f64]) -> Result<Vec<f64>, EstimateError> {
    let max = contributions.iter().fold(0.0f64, |m, v| m.max(v * v));
    if max == 0.0 {
        return Err(EstimateError::DegenerateRatio);
    }
    Ok(contributions.iter().map(|v| v * v / max).collect())
}

/// Gain in effectivity per unit of extra run time, relative to the standard construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Efficiency {
    /// `|η − η_std| / η_std`.
    pub g_eta: f64,
    /// `|t − t_std| / t_std`.
    pub l_t: f64,
    /// `g_η / l_t`.
    pub factor: f64,
}

pub fn efficiency_factor(eta: f64, eta_std: f64, t: f64, t_std: f64) -> Result<Efficiency, EstimateError> {
    if t == t_std {
        return Err(EstimateError::EqualTimes);
    }
    let g_eta = math::abs((eta - eta_std) / eta_std);
    let l_t = math::abs((t - t_std) / t_std);
    Ok(Efficiency { g_eta, l_t, factor: g_eta / l_t })
}
