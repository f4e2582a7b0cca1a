use super::{p1_gradient, FeSolution, FemError, Material, SymTensor};
use crate::math::{self, Vec3};
use crate::mesh::{check_nesting, Mesh, RefineMap};
use crate::quadrature::SimplexRule;
use alloc::vec;
use alloc::vec::Vec;

/// Squared energy norm `∫ ε(u) : K ε(u)` of a P1 field, per element.
pub fn energy_u_squared(mesh: &Mesh, material: &Material, displacement: &[Vec3]) -> Vec<f64> {
    (0..mesh.n_elements())
        .map(|e| {
            let geom = mesh.geometry(e);
            let u: Vec<Vec3> = mesh.element(e).iter().map(|&n| displacement[n]).collect();
            let eps = SymTensor::sym_grad(&p1_gradient(&geom, &u));
            geom.measure * eps.ddot(&material.hooke_apply(&eps))
        })
        .collect()
}

/// Energy norm `‖u‖_u` of a P1 displacement field.
pub fn energy_norm_u(mesh: &Mesh, material: &Material, displacement: &[Vec3]) -> f64 {
    math::sqrt(energy_u_squared(mesh, material, displacement).iter().sum())
}

/// Stress norm `(∫ σ : K⁻¹ σ)^½` of an element-wise constant stress field.
pub fn energy_norm_sigma(mesh: &Mesh, material: &Material, stress: &[SymTensor]) -> f64 {
    let s: f64 = stress.iter().enumerate().map(|(e, s)| mesh.measure(e) * material.stress_energy(s)).sum();
    math::sqrt(s)
}

/// Squared stress norm of a polynomial stress field per element, integrated
/// exactly for fields of degree at most `degree / 2`.
///
/// `field(e, bary)` evaluates the stress at barycentric coordinates `bary`.
pub fn energy_sigma_squared_with<F>(mesh: &Mesh, material: &Material, degree: usize, mut field: F) -> Vec<f64>
where
    F: FnMut(usize, &[f64; 4]) -> SymTensor,
{
    let rule = SimplexRule::new(mesh.dim().n(), degree);
    (0..mesh.n_elements())
        .map(|e| {
            let scale = mesh.measure(e) * reference_factor(mesh.dim().n());
            (0..rule.len())
                .map(|q| rule.weights[q] * material.stress_energy(&field(e, &rule.barycentric(q))))
                .sum::<f64>()
                * scale
        })
        .collect()
}

/// Ratio between a physical measure and the reference simplex measure.
fn reference_factor(d: usize) -> f64 {
    match d {
        1 => 1.0,
        2 => 2.0,
        _ => 6.0,
    }
}

/// Reference error of a coarse solution measured against a nested overkill solution.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceError {
    /// `√(‖u_ref‖² − ‖u_h‖²)`.
    pub shortcut: f64,
    /// `‖u_ref − Π u_h‖` by direct integration on the fine mesh.
    pub direct: f64,
    /// Squared direct error per coarse element.
    pub per_element_squared: Vec<f64>,
}

/// Interpolates a coarse P1 field at the nodes of a nested fine mesh.
pub fn prolongate(coarse: &Mesh, fine: &Mesh, map: &RefineMap, u: &[Vec3]) -> Vec<Vec3> {
    let mut out = vec![[0.0; 3]; fine.n_nodes()];
    let mut done = vec![false; fine.n_nodes()];
    for (fe, &parent) in map.element_parent.iter().enumerate() {
        let geom = coarse.geometry(parent);
        let el = coarse.element(parent);
        for &n in fine.element(fe) {
            if done[n] {
                continue;
            }
            let l = geom.barycentric(&fine.nodes()[n]);
            let mut v = [0.0; 3];
            for (a, &cn) in el.iter().enumerate() {
                v = math::add(v, math::scale(u[cn], l[a]));
            }
            out[n] = v;
            done[n] = true;
        }
    }
    out
}

/// Energy-norm error of `coarse_sol` with respect to `fine_sol`.
///
/// Both solutions must solve the same problem with homogeneous Dirichlet
/// data representable on both meshes, so that Galerkin orthogonality makes
/// the two evaluations agree.
pub fn reference_error(
    coarse: &Mesh,
    coarse_sol: &FeSolution,
    fine: &Mesh,
    fine_sol: &FeSolution,
    map: &RefineMap,
    material: &Material,
) -> Result<ReferenceError, FemError> {
    check_nesting(coarse, fine, map)?;
    let nu_ref: f64 = energy_u_squared(fine, material, &fine_sol.displacement).iter().sum();
    let nu_h: f64 = energy_u_squared(coarse, material, &coarse_sol.displacement).iter().sum();
    let radicand = nu_ref - nu_h;
    if radicand < -1e-12 * nu_ref.max(f64::MIN_POSITIVE) {
        return Err(FemError::NegativeReferenceError(radicand));
    }
    let pu = prolongate(coarse, fine, map, &coarse_sol.displacement);
    let diff: Vec<Vec3> = fine_sol.displacement.iter().zip(&pu).map(|(a, b)| math::sub(*a, *b)).collect();
    let fine_contrib = energy_u_squared(fine, material, &diff);
    let mut per_element_squared = vec![0.0; coarse.n_elements()];
    for (fe, v) in fine_contrib.iter().enumerate() {
        per_element_squared[map.element_parent[fe]] += v;
    }
    let direct = math::sqrt(per_element_squared.iter().sum());
    Ok(ReferenceError { shortcut: math::sqrt(radicand.max(0.0)), direct, per_element_squared })
}
