//! Enhanced tractions: the standard field is replaced on the facets of a
//! selected zone by the tractions that minimize the constitutive relation
//! error of the zone, under the equilibrium conditions of every element that
//! touches it.
//!
//! Tractions on a facet of the zone split into a part `H` fixed by the weak
//! prolongation condition and a free part `R`. For linear FE solutions the
//! facet space holds only vertex functions, so `H = 0` and `R` carries the
//! whole traction. The unknowns are the nodal values of `R` on every facet
//! of the zone, in the orientation of the facet's first element.

use crate::elasticity::{BoundaryData, CompBc, FeSolution, FemError, ProblemDef};
use crate::linalg::{
    eliminate_redundant_rows_with, objective, solve_saddle, ConstraintBlock, LinalgError, SaddleOptions, SaddleSolution,
    SparseSymmetric, REDUNDANCY_TOL,
};
use crate::local_solver::{
    traction_to_stress_operator, BodyLoad, ElementLocalSpace, ElementTraction, LocalError, TractionOperator,
};
use crate::math::{self, Vec3};
use crate::mesh::{Dim, Mesh, QualityMetrics, Topology};
use crate::pipeline::Mapper;
use crate::standard_tractions::{Provenance, TractionField};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// Consistency tolerance for redundant zone equilibrium rows. Their
/// right-hand sides combine standard tractions, which balance each element
/// only to the accuracy of the patch solves.
pub const ZONE_CONSISTENCY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnhancedError {
    #[error("the estimate criterion needs the contributions of a standard run")]
    MissingContributions,
    #[error("criterion values cover {got} elements, the mesh has {expected}")]
    ContributionLength { expected: usize, got: usize },
    #[error("invalid selection parameter {0}")]
    InvalidParameter(f64),
    #[error("only linear FE solutions are supported, got degree {0}")]
    UnsupportedDegree(usize),
    #[error("zone constraints are inconsistent near element {element:?}: {source}")]
    Infeasible {
        element: Option<usize>,
        #[source]
        source: LinalgError,
    },
    #[error("saddle solve over {selected} selected elements failed: {source}")]
    Solve {
        selected: usize,
        #[source]
        source: LinalgError,
    },
    #[error(transparent)]
    Local(#[from] LocalError),
    #[error(transparent)]
    Fem(#[from] FemError),
}

/// Element ranking used to pick the optimized zone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Criterion {
    /// Inscribed over circumscribed radius; small means distorted.
    Radius,
    /// Shortest over longest edge (triangles) or smallest over largest face (tetrahedra).
    Edge,
    /// Same ratio as [`Criterion::Edge`], under the name used for tetrahedra.
    Area,
    /// Squared contribution over the largest squared contribution of a standard run.
    Estimate,
}

impl Criterion {
    pub const ALL: [Criterion; 4] = [Criterion::Radius, Criterion::Edge, Criterion::Area, Criterion::Estimate];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Radius => "radius",
            Criterion::Edge => "edge",
            Criterion::Area => "area",
            Criterion::Estimate => "estimate",
        }
    }

    pub fn parse(s: &str) -> Option<Criterion> {
        Criterion::ALL.into_iter().find(|c| c.name().eq_ignore_ascii_case(s.trim()))
    }

    pub fn is_geometric(self) -> bool {
        self != Criterion::Estimate
    }

    /// Threshold that selects nothing: below every geometric ratio, above every estimate ratio.
    pub fn sentinel(self, values: &[f64]) -> f64 {
        match self {
            Criterion::Estimate => 1.1,
            _ => {
                let min = values.iter().fold(f64::INFINITY, |m, v| m.min(*v));
                let t = math::floor(100.0 * min) / 100.0;
                if t >= min {
                    t - 0.01
                } else {
                    t
                }
            }
        }
    }
}

/// How many elements a criterion picks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SelectionMode {
    Threshold(f64),
    /// Share of the elements in `[0, 1]`, worst first.
    Fraction(f64),
}

/// Optimized zone: the selected elements, their facets and the seam elements around them.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// `E_e`, sorted.
    pub elements: Vec<usize>,
    /// `J_e`: every facet of a selected element, sorted.
    pub facets: Vec<usize>,
    /// Elements outside `E_e` sharing exactly one facet with `J_e`, sorted.
    pub seam: Vec<usize>,
    pub criterion: Criterion,
    pub mode: SelectionMode,
    /// Elements picked by the criterion before the zone was closed.
    pub n_requested: usize,
}

impl Selection {
    /// Builds the zone around `requested`.
    ///
    /// An unselected element with two or more facets in `J_e` is added to the
    /// selection, repeatedly, so that every seam element meets the zone in a
    /// single facet.
    pub fn from_elements(
        mesh: &Mesh,
        topo: &Topology,
        requested: &[usize],
        criterion: Criterion,
        mode: SelectionMode,
    ) -> Selection {
        let ne = mesh.n_elements();
        let nv = mesh.dim().nv();
        let mut selected = vec![false; ne];
        for &e in requested {
            selected[e] = true;
        }
        loop {
            let mut in_zone = vec![false; topo.n_facets()];
            for e in (0..ne).filter(|&e| selected[e]) {
                for &f in &topo.element_facets[e][..nv] {
                    in_zone[f] = true;
                }
            }
            let absorb: Vec<usize> = (0..ne)
                .filter(|&e| !selected[e])
                .filter(|&e| topo.element_facets[e][..nv].iter().filter(|&&f| in_zone[f]).count() >= 2)
                .collect();
            if absorb.is_empty() {
                let elements: Vec<usize> = (0..ne).filter(|&e| selected[e]).collect();
                let facets: Vec<usize> = (0..topo.n_facets()).filter(|&f| in_zone[f]).collect();
                let seam = (0..ne)
                    .filter(|&e| !selected[e])
                    .filter(|&e| topo.element_facets[e][..nv].iter().any(|&f| in_zone[f]))
                    .collect();
                return Selection { elements, facets, seam, criterion, mode, n_requested: requested.len() };
            }
            for e in absorb {
                selected[e] = true;
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `Ē_e`: selected and seam elements, sorted.
    pub fn bar(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.elements.iter().chain(&self.seam).copied().collect();
        all.sort_unstable();
        all
    }

    pub fn describe(&self) -> String {
        let mode = match self.mode {
            SelectionMode::Threshold(t) => format!("threshold {t}"),
            SelectionMode::Fraction(s) => format!("fraction {s}"),
        };
        format!(
            "{} {}: {} elements ({} requested), {} facets, {} seam elements",
            self.criterion.name(),
            mode,
            self.elements.len(),
            self.n_requested,
            self.facets.len(),
            self.seam.len()
        )
    }
}

/// Per-element value of a criterion.
pub fn criterion_values(
    criterion: Criterion,
    metrics: &QualityMetrics,
    contributions: Option<&[f64]>,
) -> Result<Vec<f64>, EnhancedError> {
    match criterion {
        Criterion::Radius => Ok(metrics.radius_ratio.clone()),
        Criterion::Edge | Criterion::Area => Ok(metrics.edge_or_area_ratio.clone()),
        Criterion::Estimate => {
            let c = contributions.ok_or(EnhancedError::MissingContributions)?;
            let max = c.iter().fold(0.0f64, |m, v| m.max(v * v));
            if max == 0.0 {
                return Ok(vec![1.0; c.len()]);
            }
            Ok(c.iter().map(|v| v * v / max).collect())
        }
    }
}

/// Picks `E_e` by a criterion and closes it into a zone.
///
/// Geometric criteria take the elements whose ratio is at most the
/// threshold, the estimate criterion those whose ratio is at least the
/// threshold. A fraction `s` takes the `⌈s·n⌉` worst elements, ties broken by
/// element id.
pub fn select_elements(
    mesh: &Mesh,
    topo: &Topology,
    criterion: Criterion,
    mode: SelectionMode,
    metrics: &QualityMetrics,
    contributions: Option<&[f64]>,
) -> Result<Selection, EnhancedError> {
    let values = criterion_values(criterion, metrics, contributions)?;
    let ne = mesh.n_elements();
    if values.len() != ne {
        return Err(EnhancedError::ContributionLength { expected: ne, got: values.len() });
    }
    let requested: Vec<usize> = match mode {
        SelectionMode::Threshold(t) => {
            if t.is_nan() {
                return Err(EnhancedError::InvalidParameter(t));
            }
            (0..ne)
                .filter(|&e| if criterion.is_geometric() { values[e] <= t } else { values[e] >= t })
                .collect()
        }
        SelectionMode::Fraction(s) => {
            if !(0.0..=1.0).contains(&s) {
                return Err(EnhancedError::InvalidParameter(s));
            }
            let k = (math::ceil(s * ne as f64 - 1e-9).max(0.0) as usize).min(ne);
            let mut order: Vec<usize> = (0..ne).collect();
            if criterion.is_geometric() {
                order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
            } else {
                order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
            }
            order.truncate(k);
            order.sort_unstable();
            order
        }
    };
    Ok(Selection::from_elements(mesh, topo, &requested, criterion, mode))
}

/// Part `H` of the zone tractions, as nodal values laid out like the unknowns.
///
/// With linear FE solutions every facet function is a vertex function and the
/// weak prolongation conditions force `H = 0`.
pub fn compute_h(selection: &Selection, dim: Dim, fe_degree: usize) -> Result<Vec<f64>, EnhancedError> {
    if fe_degree != 1 {
        return Err(EnhancedError::UnsupportedDegree(fe_degree));
    }
    let d = dim.n();
    Ok(vec![0.0; selection.facets.len() * d * d])
}

/// Numbering of the zone unknowns: `(facet, slot, component)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneDofs {
    pub dim: Dim,
    pub facets: Vec<usize>,
    base: Vec<usize>,
}

impl ZoneDofs {
    pub fn new(selection: &Selection, dim: Dim, n_facets: usize) -> Self {
        let d = dim.n();
        let mut base = vec![usize::MAX; n_facets];
        for (j, &f) in selection.facets.iter().enumerate() {
            base[f] = j * d * d;
        }
        ZoneDofs { dim, facets: selection.facets.clone(), base }
    }

    pub fn len(&self) -> usize {
        let d = self.dim.n();
        self.facets.len() * d * d
    }

    pub fn is_empty(&self) -> bool {
        self.facets.is_empty()
    }

    pub fn contains(&self, f: usize) -> bool {
        self.base[f] != usize::MAX
    }

    pub fn index(&self, f: usize, slot: usize, c: usize) -> usize {
        let d = self.dim.n();
        self.base[f] + slot * d + c
    }

    /// Zone unknowns of an existing field.
    pub fn gather(&self, field: &TractionField) -> Vec<f64> {
        let d = self.dim.n();
        let mut r = vec![0.0; self.len()];
        for &f in &self.facets {
            for s in 0..d {
                for c in 0..d {
                    r[self.index(f, s, c)] = field.values[f][s][c];
                }
            }
        }
        r
    }
}

/// Global unknown, sign and local operator column of every local traction dof of `e`.
fn local_to_zone(mesh: &Mesh, topo: &Topology, dofs: &ZoneDofs, e: usize, op: &TractionOperator) -> Vec<(usize, f64)> {
    let el = mesh.element(e);
    op.dofs
        .iter()
        .map(|&(k, v, c)| {
            let f = topo.element_facets[e][k];
            let facet = &topo.facets[f];
            let slot = facet.nodes.iter().position(|&n| n == el[v]).expect("facet node");
            (dofs.index(f, slot, c), facet.sign(e))
        })
        .collect()
}

/// Quadratic program `½ rᵀAr − rᵀB` with its constraint blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct QpSystem {
    pub dofs: ZoneDofs,
    pub a: SparseSymmetric,
    pub b: Vec<f64>,
    /// Prescribed-traction rows.
    pub c: ConstraintBlock,
    /// Independent element equilibrium rows.
    pub l: ConstraintBlock,
    /// Equilibrium rows before redundancy elimination.
    pub n_equilibrium_rows: usize,
}

impl QpSystem {
    pub fn objective(&self, r: &[f64]) -> f64 {
        objective(&self.a, &self.b, r)
    }
}

/// Local energy blocks of one selected element.
struct ElementQp {
    map: Vec<(usize, f64)>,
    a: Vec<f64>,
    b: Vec<f64>,
}

/// `A` and `B` from the unit-traction stress fields of the selected elements.
///
/// `A(j,k) = Σ ∫ σ_j : K⁻¹ σ_k` and `B(j) = Σ ∫ σ_j : K⁻¹ (σ_h − σ^H)`, where
/// `σ^H` vanishes for linear FE solutions.
pub fn assemble_qp<M: Mapper>(
    mesh: &Mesh,
    topo: &Topology,
    prob: &ProblemDef,
    sol: &FeSolution,
    selection: &Selection,
    extra_degree: usize,
    mapper: &M,
) -> Result<(ZoneDofs, SparseSymmetric, Vec<f64>), EnhancedError> {
    let dim = mesh.dim();
    let nv = dim.nv();
    let dofs = ZoneDofs::new(selection, dim, topo.n_facets());
    let all_facets: Vec<usize> = (0..nv).collect();
    let locals = mapper.map(selection.elements.len(), &|i| {
        let e = selection.elements[i];
        let space = ElementLocalSpace::new(mesh, e, &prob.material, extra_degree)?;
        let op = traction_to_stress_operator(&space, &all_facets);
        let k = space.stiffness();
        let n = op.columns.len();
        let kw: Vec<Vec<f64>> = op.columns.iter().map(|w| k.mul_vec(w)).collect();
        let mut a = vec![0.0; n * n];
        for p in 0..n {
            for q in p..n {
                let v = math::dot_slice(&op.columns[p], &kw[q]);
                a[p * n + q] = v;
                a[q * n + p] = v;
            }
        }
        let g = space.constant_stress_work(&sol.stress[e]);
        let b = op.columns.iter().map(|w| math::dot_slice(w, &g)).collect();
        Ok::<_, EnhancedError>(ElementQp { map: local_to_zone(mesh, topo, &dofs, e, &op), a, b })
    });
    let mut a = SparseSymmetric::new(dofs.len());
    let mut b = vec![0.0; dofs.len()];
    for local in locals {
        let local = local?;
        let n = local.map.len();
        for p in 0..n {
            let (gp, sp) = local.map[p];
            b[gp] += sp * local.b[p];
            for q in 0..n {
                let (gq, sq) = local.map[q];
                if gq >= gp {
                    a.add(gp, gq, sp * sq * local.a[p * n + q]);
                }
            }
        }
    }
    a.finalize();
    Ok((dofs, a, b))
}

/// Force and moment of a unit nodal traction `(facet k, vertex v, component c)` on `e`.
fn unit_resultants(geom: &crate::mesh::ElementGeometry, k: usize, v: usize, c: usize) -> (Vec3, Vec3) {
    let mut t = ElementTraction::zero();
    t.values[k][v][c] = 1.0;
    t.resultants(geom)
}

/// Indices of the balance equations kept in each dimension: force components, then moment components.
fn balance_components(dim: Dim) -> Vec<(bool, usize)> {
    match dim {
        Dim::Two => vec![(false, 0), (false, 1), (true, 2)],
        Dim::Three => vec![(false, 0), (false, 1), (false, 2), (true, 0), (true, 1), (true, 2)],
    }
}

/// Prescribed-traction rows and element equilibrium rows of the zone.
///
/// Every element of `Ē_e` must be in equilibrium. Facets outside `J_e` keep
/// their standard tractions, which enter the right-hand side. The joint
/// system is reduced to independent rows.
pub fn assemble_constraints(
    mesh: &Mesh,
    topo: &Topology,
    prob: &ProblemDef,
    bd: &BoundaryData,
    selection: &Selection,
    h: &[f64],
    standard: &TractionField,
    dofs: &ZoneDofs,
) -> Result<(ConstraintBlock, ConstraintBlock, usize), EnhancedError> {
    let dim = mesh.dim();
    let d = dim.n();
    let nv = dim.nv();
    let mut joint = ConstraintBlock::new("C+L");
    let mut owner: Vec<Option<usize>> = Vec::new();
    for &f in &dofs.facets {
        let facet = &topo.facets[f];
        if !facet.is_boundary() {
            continue;
        }
        for c in 0..d {
            if let CompBc::Neumann(v) = bd.facet_bc[f].comp[c] {
                for s in 0..d {
                    let i = dofs.index(f, s, c);
                    joint.push(vec![(i, 1.0)], v - h[i]);
                    owner.push(Some(facet.elements[0]));
                }
            }
        }
    }
    let n_c = joint.len();
    let body = BodyLoad::constant(prob.body_force);
    let comps = balance_components(dim);
    for e in selection.bar() {
        let geom = mesh.geometry(e);
        let el = mesh.element(e);
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); comps.len()];
        let (fb, mb) = body.resultants(&geom);
        let mut known = ElementTraction::zero();
        for k in 0..nv {
            let f = topo.element_facets[e][k];
            let facet = &topo.facets[f];
            let sign = facet.sign(e);
            for v in (0..nv).filter(|&v| v != k) {
                let slot = facet.nodes.iter().position(|&n| n == el[v]).expect("facet node");
                if dofs.contains(f) {
                    for c in 0..d {
                        let (force, moment) = unit_resultants(&geom, k, v, c);
                        let i = dofs.index(f, slot, c);
                        for (row, &(is_moment, m)) in rows.iter_mut().zip(&comps) {
                            let w = if is_moment { moment[m] } else { force[m] } * sign;
                            if w != 0.0 {
                                row.push((i, w));
                            }
                        }
                    }
                } else {
                    known.values[k][v] = math::scale(standard.values[f][slot], sign);
                }
            }
        }
        let (fk, mk) = known.resultants(&geom);
        for (row, &(is_moment, m)) in rows.into_iter().zip(&comps) {
            let rhs = if is_moment { -(mb[m] + mk[m]) } else { -(fb[m] + fk[m]) };
            joint.push(row, rhs);
            owner.push(Some(e));
        }
    }
    let n_l = joint.len() - n_c;
    let reduced = eliminate_redundant_rows_with(&joint, REDUNDANCY_TOL, ZONE_CONSISTENCY_TOL).map_err(|source| {
        let element = match &source {
            LinalgError::InfeasibleConstraints { row, .. } => owner.get(*row).copied().flatten(),
            _ => None,
        };
        EnhancedError::Infeasible { element, source }
    })?;
    let mut c_block = ConstraintBlock::new("C");
    let mut l_block = ConstraintBlock::new("L");
    for (r, &orig) in reduced.kept.iter().enumerate() {
        let target = if orig < n_c { &mut c_block } else { &mut l_block };
        target.push(reduced.block.rows[r].clone(), reduced.block.rhs[r]);
    }
    Ok((c_block, l_block, n_l))
}

/// Builds the full quadratic program of a zone.
pub fn build_qp<M: Mapper>(
    mesh: &Mesh,
    topo: &Topology,
    prob: &ProblemDef,
    sol: &FeSolution,
    standard: &TractionField,
    selection: &Selection,
    extra_degree: usize,
    mapper: &M,
) -> Result<QpSystem, EnhancedError> {
    let bd = prob.resolve(mesh, topo)?;
    let h = compute_h(selection, mesh.dim(), 1)?;
    let (dofs, a, b) = assemble_qp(mesh, topo, prob, sol, selection, extra_degree, mapper)?;
    let (c, l, n_equilibrium_rows) = assemble_constraints(mesh, topo, prob, &bd, selection, &h, standard, &dofs)?;
    Ok(QpSystem { dofs, a, b, c, l, n_equilibrium_rows })
}

/// Result of an enhanced construction.
#[derive(Debug, Clone, PartialEq)]
pub struct EnhancedSolution {
    /// Standard tractions outside the zone, `H + R` on it.
    pub field: TractionField,
    pub h: Vec<f64>,
    pub r: Vec<f64>,
    pub saddle: Option<SaddleSolution>,
    pub objective: f64,
}

/// Solves the zone program and merges the result into the standard field.
pub fn solve_enhanced(qp: &QpSystem, standard: &TractionField, n_selected: usize) -> Result<EnhancedSolution, EnhancedError> {
    let mut field = standard.clone();
    field.provenance = Provenance::Enhanced;
    if qp.dofs.is_empty() {
        return Ok(EnhancedSolution { field, h: Vec::new(), r: Vec::new(), saddle: None, objective: 0.0 });
    }
    let blocks = [qp.c.clone(), qp.l.clone()];
    let s = solve_saddle(&qp.a, &qp.b, &blocks, &SaddleOptions::default())
        .map_err(|source| EnhancedError::Solve { selected: n_selected, source })?;
    let d = qp.dofs.dim.n();
    for &f in &qp.dofs.facets {
        for slot in 0..d {
            for c in 0..d {
                if !field.prescribed[f][c] {
                    field.values[f][slot][c] = s.x[qp.dofs.index(f, slot, c)];
                }
            }
        }
    }
    let worst = s.constraint_residuals.iter().fold(0.0f64, |m, v| m.max(*v));
    field.max_constraint_residual = field.max_constraint_residual.max(worst);
    let objective = qp.objective(&s.x);
    Ok(EnhancedSolution { field, h: vec![0.0; s.x.len()], r: s.x.clone(), saddle: Some(s), objective })
}

/// Selection, program and solve in one call.
pub fn enhanced_tractions<M: Mapper>(
    mesh: &Mesh,
    topo: &Topology,
    prob: &ProblemDef,
    sol: &FeSolution,
    standard: &TractionField,
    selection: &Selection,
    extra_degree: usize,
    mapper: &M,
) -> Result<EnhancedSolution, EnhancedError> {
    let qp = build_qp(mesh, topo, prob, sol, standard, selection, extra_degree, mapper)?;
    solve_enhanced(&qp, standard, selection.elements.len())
}
