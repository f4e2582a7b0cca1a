//! Execution hooks supplied by the host (parallel mapping, timing) and the
//! end-to-end estimator runs built on them.

use crate::elasticity::{assemble_solve, reference_error, FeSolution, ProblemDef, ReferenceError};
use crate::enhanced_tractions::{build_qp, solve_enhanced, Selection};
use crate::estimator::{cre_estimate, effectivity, efficiency_factor, recover_admissible_stress, AdmissibleStress, ErrorReport};
use crate::mesh::{build_topology, uniform_refine_with_map, Mesh, Topology};
use crate::standard_tractions::{standard_tractions, TractionField};
use crate::{Error, Result};
use alloc::string::String;
use alloc::vec::Vec;

/// Maps a function over `0..n`, possibly in parallel, preserving index order.
pub trait Mapper: Sync {
    fn map<R: Send>(&self, n: usize, f: &(dyn Fn(usize) -> R + Sync)) -> Vec<R>;
}

/// Runs every task on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Mapper for Sequential {
    fn map<R: Send>(&self, n: usize, f: &(dyn Fn(usize) -> R + Sync)) -> Vec<R> {
        (0..n).map(f).collect()
    }
}

/// Monotonic wall clock in seconds.
pub trait Clock {
    fn now(&self) -> f64;
}

/// Clock that always reads zero, for hosts without a time source.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn now(&self) -> f64 {
        0.0
    }
}

/// Finite element solution together with the topology it was computed on.
#[derive(Debug, Clone)]
pub struct Solved {
    pub topology: Topology,
    pub solution: FeSolution,
}

pub fn solve(mesh: &Mesh, prob: &ProblemDef) -> Result<Solved> {
    let topology = build_topology(mesh).map_err(|e| Error::from(e).in_phase("topology"))?;
    let solution = assemble_solve(mesh, &topology, prob).map_err(|e| Error::from(e).in_phase("fe solve"))?;
    Ok(Solved { topology, solution })
}

/// Overkill reference error from `levels` uniform refinements.
pub fn reference(mesh: &Mesh, prob: &ProblemDef, sol: &FeSolution, levels: usize) -> Result<ReferenceError> {
    let (fine, map) = uniform_refine_with_map(mesh, levels);
    let fine_sol = solve(&fine, prob).map_err(|e| e.in_phase("reference"))?;
    reference_error(mesh, sol, &fine, &fine_sol.solution, &map, &prob.material)
        .map_err(|e| Error::from(e).in_phase("reference"))
}

/// Tractions, admissible stress and error report of one estimator run.
#[derive(Debug, Clone)]
pub struct Estimate {
    pub field: TractionField,
    pub admissible: AdmissibleStress,
    pub report: ErrorReport,
    pub selection: Option<Selection>,
    /// Value of the zone objective at the optimum, for enhanced runs.
    pub objective: Option<f64>,
}

impl Estimate {
    /// Largest relative constraint residual over every saddle solve of the run.
    pub fn max_constraint_residual(&self) -> f64 {
        self.field.max_constraint_residual
    }

    /// Fills the reference-dependent fields of the report.
    pub fn attach_reference(&mut self, reference_error: f64) {
        self.report.reference_error = Some(reference_error);
        self.report.effectivity = effectivity(self.report.theta, reference_error).ok();
    }
}

fn timed<T, C: Clock>(clock: &C, timings: &mut Vec<(String, f64)>, name: &str, f: impl FnOnce() -> T) -> T {
    let start = clock.now();
    let out = f();
    timings.push((String::from(name), clock.now() - start));
    out
}

/// Standard construction: patch tractions, local recovery and the estimate.
pub fn standard_estimate<M: Mapper, C: Clock>(
    mesh: &Mesh,
    topo: &Topology,
    prob: &ProblemDef,
    sol: &FeSolution,
    extra_degree: usize,
    mapper: &M,
    clock: &C,
) -> Result<Estimate> {
    let mut timings = Vec::new();
    let field = timed(clock, &mut timings, "patch", || standard_tractions(mesh, topo, prob, sol, mapper))
        .map_err(|e| Error::from(e).in_phase("standard tractions"))?;
    let admissible = timed(clock, &mut timings, "recovery", || {
        recover_admissible_stress(mesh, topo, &field, prob, extra_degree, mapper)
    })
    .map_err(|e| Error::from(e).in_phase("recovery"))?;
    let mut report = timed(clock, &mut timings, "estimate", || cre_estimate(mesh, &admissible, sol, &prob.material));
    report.timings = timings;
    Ok(Estimate { field, admissible, report, selection: None, objective: None })
}

/// Enhanced construction on `selection`, starting from a standard run.
///
/// The timings include the patch phase of the standard run, since the
/// enhanced field needs the standard tractions outside the zone.
#[allow(clippy::too_many_arguments)]
pub fn enhanced_estimate<M: Mapper, C: Clock>(
    mesh: &Mesh,
    topo: &Topology,
    prob: &ProblemDef,
    sol: &FeSolution,
    standard: &Estimate,
    selection: &Selection,
    extra_degree: usize,
    mapper: &M,
    clock: &C,
) -> Result<Estimate> {
    let mut timings: Vec<(String, f64)> =
        standard.report.timings.iter().filter(|(n, _)| n == "patch").cloned().collect();
    let qp = timed(clock, &mut timings, "qp", || {
        build_qp(mesh, topo, prob, sol, &standard.field, selection, extra_degree, mapper)
    })
    .map_err(|e| Error::from(e).in_phase("enhanced assembly"))?;
    let solved = timed(clock, &mut timings, "saddle", || solve_enhanced(&qp, &standard.field, selection.elements.len()))
        .map_err(|e| Error::from(e).in_phase("enhanced solve"))?;
    let mut admissible = timed(clock, &mut timings, "recovery", || {
        recover_admissible_stress(mesh, topo, &solved.field, prob, extra_degree, mapper)
    })
    .map_err(|e| Error::from(e).in_phase("recovery"))?;
    admissible.selection = Some(selection.describe());
    let mut report = timed(clock, &mut timings, "estimate", || cre_estimate(mesh, &admissible, sol, &prob.material));
    report.timings = timings;
    let t_std = standard.report.total_time();
    if t_std > 0.0 {
        report.normalized_cpu = Some(report.total_time() / t_std);
    }
    Ok(Estimate {
        field: solved.field,
        admissible,
        report,
        selection: Some(selection.clone()),
        objective: Some(solved.objective),
    })
}

/// Fills the normalized time and efficiency factor of an enhanced report relative to a standard one.
pub fn compare_to_standard(report: &mut ErrorReport, standard: &ErrorReport) {
    if let (Some(eta), Some(eta_std)) = (report.effectivity, standard.effectivity) {
        report.efficiency = efficiency_factor(eta, eta_std, report.total_time(), standard.total_time()).ok();
    }
}
