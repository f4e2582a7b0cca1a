//! Equilibrated inter-element tractions from vertex star-patch problems.
//!
//! For a P1 solution the traction on a facet `Γ` is linear. It is described
//! by its moments `b_Γ^i = ∫_Γ λ_i F̂` against the hat functions of the facet
//! vertices. Each vertex patch determines the moments of its own hat function
//! on the facets around it. These moments must reproduce the FE stress work
//! `∫_E σ_h : ε(λ_i c) − ∫_E f·λ_i c` on every patch element and every unit
//! direction `c`, and they are otherwise as close as possible to the moments
//! of an averaged FE traction. The nodal traction values follow from the
//! moments through the inverse facet mass matrix.

use crate::elasticity::{BoundaryData, CompBc, FeSolution, FemError, ProblemDef};
use crate::linalg::{
    eliminate_redundant_rows, solve_saddle, ConstraintBlock, LinalgError, SaddleOptions, SparseSymmetric,
    REDUNDANCY_TOL,
};
use crate::local_solver::{BodyLoad, ElementTraction};
use crate::math::{self, Vec3};
use crate::mesh::{Dim, Mesh, Topology};
use crate::pipeline::Mapper;
use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TractionError {
    #[error("patch of vertex {vertex}: {source}")]
    Patch {
        vertex: usize,
        #[source]
        source: LinalgError,
    },
    #[error("facet {0} received no patch contribution")]
    MissingPatch(usize),
    #[error(transparent)]
    Fem(#[from] FemError),
}

/// How a traction field was built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Standard,
    Enhanced,
}

/// Piecewise linear traction on every facet, in the orientation of the
/// facet's first adjacent element.
#[derive(Debug, Clone, PartialEq)]
pub struct TractionField {
    pub dim: Dim,
    /// `values[f][slot]` is the traction at node `facets[f].nodes[slot]`.
    pub values: Vec<[Vec3; 3]>,
    /// Components carrying a prescribed traction.
    pub prescribed: Vec<[bool; 3]>,
    pub provenance: Provenance,
    /// Largest relative constraint residual over the saddle solves that built the field.
    pub max_constraint_residual: f64,
}

impl TractionField {
    pub fn zero(dim: Dim, n_facets: usize) -> Self {
        TractionField {
            dim,
            values: vec![[[0.0; 3]; 3]; n_facets],
            prescribed: vec![[false; 3]; n_facets],
            provenance: Provenance::Standard,
            max_constraint_residual: 0.0,
        }
    }

    /// Traction seen by element `e` (multiplied by its orientation signs).
    pub fn element_traction(&self, mesh: &Mesh, topo: &Topology, e: usize) -> ElementTraction {
        let nv = mesh.dim().nv();
        let el = mesh.element(e);
        let mut t = ElementTraction::zero();
        for k in 0..nv {
            let f = topo.element_facets[e][k];
            let facet = &topo.facets[f];
            let s = facet.sign(e);
            for v in (0..nv).filter(|&v| v != k) {
                let slot = facet.nodes.iter().position(|&n| n == el[v]).expect("facet node");
                t.values[k][v] = math::scale(self.values[f][slot], s);
            }
        }
        t
    }

    /// Facet traction at the nodes, as a flat `(slot, component)` vector.
    pub fn facet_dofs(&self, f: usize) -> Vec<f64> {
        let d = self.dim.n();
        (0..d * d).map(|i| self.values[f][i / d][i % d]).collect()
    }
}

/// Constant FE traction used as the least-squares target on a facet.
///
/// Interior facets average the two one-sided tractions (normal of the first
/// element); prescribed components take `F_d`; Dirichlet components use the
/// one-sided FE traction.
pub fn fe_traction_target(mesh: &Mesh, topo: &Topology, bd: &BoundaryData, sol: &FeSolution, facet: usize) -> Vec3 {
    let f = &topo.facets[facet];
    let e0 = f.elements[0];
    let (n, _) = mesh.geometry(e0).facet_normal(f.local_index[0]);
    let mut t = sol.stress[e0].apply(&n);
    if !f.is_boundary() {
        let t1 = sol.stress[f.elements[1]].apply(&n);
        return math::scale(math::add(t, t1), 0.5);
    }
    for c in 0..mesh.dim().n() {
        if let CompBc::Neumann(v) = bd.facet_bc[facet].comp[c] {
            t[c] = v;
        }
    }
    t
}

/// Least-squares problem of one vertex patch.
///
/// Unknowns are the moments `b_Γ^i[c]`, flat `(facet slot, component)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchSystem {
    pub vertex: usize,
    pub elements: Vec<usize>,
    pub facets: Vec<usize>,
    pub dim: Dim,
    /// Weight of each unknown: the diagonal of the inverse facet mass matrix.
    pub weights: Vec<f64>,
    /// Moments of the target traction.
    pub target: Vec<f64>,
    /// One row per patch element and direction.
    pub equilibrium: ConstraintBlock,
    /// Prescribed-traction rows.
    pub neumann: ConstraintBlock,
}

impl PatchSystem {
    pub fn n_unknowns(&self) -> usize {
        self.facets.len() * self.dim.n()
    }
}

/// Builds the patch problem of `vertex`.
pub fn build_patch_system(
    mesh: &Mesh,
    topo: &Topology,
    prob: &ProblemDef,
    bd: &BoundaryData,
    sol: &FeSolution,
    vertex: usize,
) -> PatchSystem {
    let dim = mesh.dim();
    let d = dim.n();
    let patch = &topo.vertex_patches[vertex];
    let slot_of = |f: usize| patch.facets.iter().position(|&x| x == f);
    let mut weights = Vec::with_capacity(patch.facets.len() * d);
    let mut target = Vec::with_capacity(patch.facets.len() * d);
    let mut neumann = ConstraintBlock::new("C");
    for (j, &f) in patch.facets.iter().enumerate() {
        let facet = &topo.facets[f];
        let (_, area) = mesh.geometry(facet.elements[0]).facet_normal(facet.local_index[0]);
        let t = fe_traction_target(mesh, topo, bd, sol, f);
        for c in 0..d {
            weights.push(d as f64 * d as f64 / area);
            target.push(t[c] * area / d as f64);
            if let CompBc::Neumann(v) = bd.facet_bc[f].comp[c] {
                neumann.push(vec![(j * d + c, 1.0)], v * area / d as f64);
            }
        }
    }
    let mut equilibrium = ConstraintBlock::new("L");
    for &e in &patch.elements {
        let geom = mesh.geometry(e);
        let el = mesh.element(e);
        let li = el.iter().position(|&n| n == vertex).expect("patch element contains vertex");
        let s = sol.stress[e].to_matrix();
        for c in 0..d {
            let mut row = Vec::new();
            for k in (0..dim.nv()).filter(|&k| k != li) {
                let f = topo.element_facets[e][k];
                let j = slot_of(f).expect("facet in patch");
                row.push((j * d + c, topo.facets[f].sign(e)));
            }
            let work: f64 = (0..d).map(|m| s[c][m] * geom.grads[li][m]).sum();
            let rhs = geom.measure * (work - prob.body_force[c] / dim.nv() as f64);
            equilibrium.push(row, rhs);
        }
    }
    PatchSystem { vertex, elements: patch.elements.clone(), facets: patch.facets.clone(), dim, weights, target, equilibrium, neumann }
}

/// Solution of one patch problem.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchSolution {
    pub vertex: usize,
    pub facets: Vec<usize>,
    /// Moments `b_Γ^i`, flat `(facet slot, component)`.
    pub moments: Vec<f64>,
    pub max_constraint_residual: f64,
}

/// Minimizes the weighted distance to the target moments under the patch
/// equilibrium and prescribed-traction rows.
pub fn solve_patch(sys: &PatchSystem, opts: &SaddleOptions) -> Result<PatchSolution, TractionError> {
    let wrap = |source| TractionError::Patch { vertex: sys.vertex, source };
    let mut joint = sys.neumann.clone();
    let n_c = joint.len();
    joint.rows.extend(sys.equilibrium.rows.iter().cloned());
    joint.rhs.extend(sys.equilibrium.rhs.iter().copied());
    joint.label = alloc::string::String::from("C+L");
    let reduced = eliminate_redundant_rows(&joint, REDUNDANCY_TOL).map_err(wrap)?;
    let mut c_block = ConstraintBlock::new("C");
    let mut l_block = ConstraintBlock::new("L");
    for (r, &orig) in reduced.kept.iter().enumerate() {
        let target = if orig < n_c { &mut c_block } else { &mut l_block };
        target.push(reduced.block.rows[r].clone(), reduced.block.rhs[r]);
    }
    let a = SparseSymmetric::from_diagonal(&sys.weights);
    let b: Vec<f64> = sys.weights.iter().zip(&sys.target).map(|(w, t)| w * t).collect();
    let s = solve_saddle(&a, &b, &[c_block, l_block], opts).map_err(wrap)?;
    let mut worst = s.constraint_residuals.iter().fold(0.0f64, |m, v| m.max(*v));
    // Discarded rows must hold as well.
    let scale = 1.0 + joint.rhs.iter().fold(0.0f64, |m, v| m.max(math::abs(*v)));
    worst = worst.max(joint.max_residual(&s.x) / scale);
    Ok(PatchSolution { vertex: sys.vertex, facets: sys.facets.clone(), moments: s.x, max_constraint_residual: worst })
}

/// Sums the patch moments on each facet and converts them to nodal values.
pub fn assemble_tractions(
    mesh: &Mesh,
    topo: &Topology,
    bd: &BoundaryData,
    solutions: &[PatchSolution],
) -> Result<TractionField, TractionError> {
    let dim = mesh.dim();
    let d = dim.n();
    let nf = topo.n_facets();
    let mut moments = vec![[[0.0; 3]; 3]; nf];
    let mut seen = vec![0usize; nf];
    let mut field = TractionField::zero(dim, nf);
    for ps in solutions {
        for (j, &f) in ps.facets.iter().enumerate() {
            let slot = topo.facets[f].nodes.iter().position(|&n| n == ps.vertex).expect("vertex on facet");
            for c in 0..d {
                moments[f][slot][c] += ps.moments[j * d + c];
            }
            seen[f] += 1;
        }
        field.max_constraint_residual = field.max_constraint_residual.max(ps.max_constraint_residual);
    }
    for f in 0..nf {
        if seen[f] != d {
            return Err(TractionError::MissingPatch(f));
        }
        let facet = &topo.facets[f];
        let (_, area) = mesh.geometry(facet.elements[0]).facet_normal(facet.local_index[0]);
        // M⁻¹ = (d/|Γ|)((d+1) I − 1 1ᵀ)
        for c in 0..d {
            let sum: f64 = (0..d).map(|s| moments[f][s][c]).sum();
            for s in 0..d {
                field.values[f][s][c] = d as f64 / area * ((d + 1) as f64 * moments[f][s][c] - sum);
            }
            if let CompBc::Neumann(v) = bd.facet_bc[f].comp[c] {
                field.prescribed[f][c] = true;
                for s in 0..d {
                    field.values[f][s][c] = v;
                }
            }
        }
    }
    Ok(field)
}

/// Standard construction over all vertex patches.
pub fn standard_tractions<M: Mapper>(
    mesh: &Mesh,
    topo: &Topology,
    prob: &ProblemDef,
    sol: &FeSolution,
    mapper: &M,
) -> Result<TractionField, TractionError> {
    let bd = prob.resolve(mesh, topo)?;
    let opts = SaddleOptions::default();
    let results = mapper.map(mesh.n_nodes(), &|v| {
        if topo.vertex_patches[v].elements.is_empty() {
            return Ok(None);
        }
        let sys = build_patch_system(mesh, topo, prob, &bd, sol, v);
        solve_patch(&sys, &opts).map(Some)
    });
    let mut solutions = Vec::with_capacity(results.len());
    for r in results {
        if let Some(s) = r? {
            solutions.push(s);
        }
    }
    assemble_tractions(mesh, topo, &bd, &solutions)
}

/// Force and moment residuals `‖∫_{∂E} ηF̂ + ∫_E f‖` and the analogous moment about the centroid.
pub fn verify_equilibrium(field: &TractionField, mesh: &Mesh, topo: &Topology, prob: &ProblemDef, e: usize) -> (f64, f64) {
    let geom = mesh.geometry(e);
    let (ft, mt) = field.element_traction(mesh, topo, e).resultants(&geom);
    let (fb, mb) = BodyLoad::constant(prob.body_force).resultants(&geom);
    let mut force = math::add(ft, fb);
    let mut moment = math::add(mt, mb);
    if mesh.dim() == Dim::Two {
        force[2] = 0.0;
        moment = [0.0, 0.0, moment[2]];
    }
    (math::norm(force), math::norm(moment))
}

/// Largest force and moment residuals over all elements.
pub fn max_equilibrium_residual(field: &TractionField, mesh: &Mesh, topo: &Topology, prob: &ProblemDef) -> (f64, f64) {
    (0..mesh.n_elements())
        .map(|e| verify_equilibrium(field, mesh, topo, prob, e))
        .fold((0.0, 0.0), |(a, b), (f, m)| (a.max(f), b.max(m)))
}
