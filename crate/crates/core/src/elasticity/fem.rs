use super::{BoundaryData, FemError, Material, ProblemDef, SymTensor};
use crate::linalg::{solve_spd, LinalgError, SparseSymmetric};
use crate::math::Vec3;
use crate::mesh::{ElementGeometry, Mesh, Topology};
use alloc::vec;
use alloc::vec::Vec;

/// P1 finite element solution.
#[derive(Debug, Clone, PartialEq)]
pub struct FeSolution {
    /// Nodal displacements (third component zero in 2D).
    pub displacement: Vec<Vec3>,
    /// Constant strain per element.
    pub strain: Vec<SymTensor>,
    /// Constant stress per element.
    pub stress: Vec<SymTensor>,
}

/// Displacement gradient of a P1 field on one element.
pub fn p1_gradient(geom: &ElementGeometry, nodal: &[Vec3]) -> [[f64; 3]; 3] {
    let mut g = [[0.0; 3]; 3];
    for (a, u) in nodal.iter().enumerate() {
        for i in 0..3 {
            for j in 0..3 {
                g[i][j] += u[i] * geom.grads[a][j];
            }
        }
    }
    g
}

/// Element stiffness of the P1 element, dofs ordered `(vertex, component)`.
pub fn p1_stiffness(geom: &ElementGeometry, material: &Material) -> Vec<f64> {
    let d = geom.dim.n();
    let nv = d + 1;
    let nd = nv * d;
    let (lambda, mu) = material.lame();
    let mut k = vec![0.0; nd * nd];
    let g = &geom.grads;
    for a in 0..nv {
        for b in 0..nv {
            let gg: f64 = (0..d).map(|m| g[a][m] * g[b][m]).sum();
            for i in 0..d {
                for j in 0..d {
                    let mut v = lambda * g[a][i] * g[b][j] + mu * g[a][j] * g[b][i];
                    if i == j {
                        v += mu * gg;
                    }
                    k[(a * d + i) * nd + b * d + j] = v * geom.measure;
                }
            }
        }
    }
    k
}

/// Assembles and solves the P1 problem with Dirichlet elimination.
pub fn assemble_solve(mesh: &Mesh, topo: &Topology, prob: &ProblemDef) -> Result<FeSolution, FemError> {
    let bd = prob.resolve(mesh, topo)?;
    solve_with(mesh, topo, prob, &bd)
}

pub(crate) fn solve_with(mesh: &Mesh, topo: &Topology, prob: &ProblemDef, bd: &BoundaryData) -> Result<FeSolution, FemError> {
    let d = mesh.dim().n();
    let n_dof = mesh.n_nodes() * d;
    let mut fixed = vec![None; n_dof];
    for (&(node, c), &v) in &bd.node_values {
        fixed[node * d + c] = Some(v);
    }
    let mut map = vec![usize::MAX; n_dof];
    let mut n_free = 0;
    for (i, f) in fixed.iter().enumerate() {
        if f.is_none() {
            map[i] = n_free;
            n_free += 1;
        }
    }
    let load = nodal_loads(mesh, topo, prob, bd);
    let mut rhs: Vec<f64> = (0..n_dof).filter(|&i| fixed[i].is_none()).map(|i| load[i]).collect();
    let mut k = SparseSymmetric::new(n_free);
    for e in 0..mesh.n_elements() {
        let geom = mesh.geometry(e);
        let ke = p1_stiffness(&geom, &prob.material);
        let el = mesh.element(e);
        let nd = el.len() * d;
        let dof = |l: usize| el[l / d] * d + l % d;
        for p in 0..nd {
            let gp = dof(p);
            if fixed[gp].is_some() {
                continue;
            }
            for q in 0..nd {
                let gq = dof(q);
                match fixed[gq] {
                    Some(v) => rhs[map[gp]] -= ke[p * nd + q] * v,
                    None if map[gq] <= map[gp] => k.add(map[gp], map[gq], ke[p * nd + q]),
                    None => {}
                }
            }
        }
    }
    k.finalize();
    let x = solve_spd(&k, &rhs).map_err(|e| match e {
        LinalgError::NotPositiveDefinite { row, .. } => {
            FemError::RigidMode { node: (0..n_dof).find(|&i| map[i] == row).map_or(0, |i| i / d) }
        }
        e => FemError::Solver(e),
    })?;
    let mut displacement = vec![[0.0; 3]; mesh.n_nodes()];
    for i in 0..n_dof {
        displacement[i / d][i % d] = match fixed[i] {
            Some(v) => v,
            None => x[map[i]],
        };
    }
    Ok(solution_from_displacement(mesh, &prob.material, displacement))
}

/// Builds strain and stress fields of a nodal displacement vector.
pub fn solution_from_displacement(mesh: &Mesh, material: &Material, displacement: Vec<Vec3>) -> FeSolution {
    let mut strain = Vec::with_capacity(mesh.n_elements());
    let mut stress = Vec::with_capacity(mesh.n_elements());
    for e in 0..mesh.n_elements() {
        let geom = mesh.geometry(e);
        let u: Vec<Vec3> = mesh.element(e).iter().map(|&n| displacement[n]).collect();
        let eps = SymTensor::sym_grad(&p1_gradient(&geom, &u));
        strain.push(eps);
        stress.push(material.hooke_apply(&eps));
    }
    FeSolution { displacement, strain, stress }
}

/// Consistent nodal loads `∫ f φ + ∫ F_d φ`, flat `(node, component)`.
pub fn nodal_loads(mesh: &Mesh, topo: &Topology, prob: &ProblemDef, bd: &BoundaryData) -> Vec<f64> {
    let d = mesh.dim().n();
    let mut load = vec![0.0; mesh.n_nodes() * d];
    for e in 0..mesh.n_elements() {
        let w = mesh.measure(e) / (d + 1) as f64;
        for &n in mesh.element(e) {
            for c in 0..d {
                load[n * d + c] += prob.body_force[c] * w;
            }
        }
    }
    for (fid, f) in topo.facets.iter().enumerate() {
        if !f.is_boundary() {
            continue;
        }
        let (_, area) = mesh.geometry(f.elements[0]).facet_normal(f.local_index[0]);
        for c in 0..d {
            if let Some(t) = bd.facet_bc[fid].neumann(c) {
                for &n in f.node_ids(d) {
                    load[n * d + c] += t * area / d as f64;
                }
            }
        }
    }
    load
}

/// FE residual `∫ σ_h : ε(φ) − ∫ f φ − ∫ F_d φ` at every `(node, component)`.
///
/// Vanishes at unconstrained dofs for a Galerkin solution.
pub fn nodal_residual(mesh: &Mesh, topo: &Topology, prob: &ProblemDef, sol: &FeSolution) -> Result<Vec<f64>, FemError> {
    let bd = prob.resolve(mesh, topo)?;
    let d = mesh.dim().n();
    let mut r: Vec<f64> = nodal_loads(mesh, topo, prob, &bd).iter().map(|v| -v).collect();
    for e in 0..mesh.n_elements() {
        let geom = mesh.geometry(e);
        let s = sol.stress[e].to_matrix();
        for (a, &n) in mesh.element(e).iter().enumerate() {
            for i in 0..d {
                r[n * d + i] += geom.measure * (0..d).map(|j| s[i][j] * geom.grads[a][j]).sum::<f64>();
            }
        }
    }
    Ok(r)
}

/// Magnitude of the external loads: total force plus body-force resultant.
pub fn load_scale(mesh: &Mesh, topo: &Topology, prob: &ProblemDef, sol: Option<&FeSolution>) -> f64 {
    let d = mesh.dim().n();
    let mut s = 0.0;
    if let Ok(bd) = prob.resolve(mesh, topo) {
        for (fid, f) in topo.facets.iter().enumerate() {
            if !f.is_boundary() {
                continue;
            }
            let (_, area) = mesh.geometry(f.elements[0]).facet_normal(f.local_index[0]);
            let t: f64 = (0..d).filter_map(|c| bd.facet_bc[fid].neumann(c)).map(|v| v * v).sum();
            s += crate::math::sqrt(t) * area;
        }
    }
    let fb = crate::math::norm(prob.body_force);
    s += fb * mesh.total_measure();
    if s == 0.0 {
        if let Some(sol) = sol {
            // Displacement-driven problems: use the stress magnitude instead.
            s = sol.stress.iter().enumerate().map(|(e, t)| t.max_abs() * mesh.measure(e)).sum::<f64>()
                / mesh.diameter().max(f64::MIN_POSITIVE);
        }
    }
    if s == 0.0 {
        1.0
    } else {
        s
    }
}
