use super::bernstein::{self, Bernstein};
use super::loads::{balancing_body_force, simplex_moments, BodyLoad, ElementTraction, SimplexMoments};
use super::LocalError;
use crate::elasticity::{Material, SymTensor};
use crate::linalg::dense::{Cholesky, DMat};
use crate::math::{self, Vec3};
use crate::mesh::{ElementGeometry, Mesh};
use alloc::vec;
use alloc::vec::Vec;

/// Relative tolerance on the self-equilibrium of local Neumann data.
pub const COMPATIBILITY_TOL: f64 = 1e-8;

/// Displacement space of degree `1 + k` on one element with its stiffness.
///
/// Unknowns are Bernstein coefficients ordered `(polynomial, component)`.
#[derive(Debug, Clone)]
pub struct ElementLocalSpace {
    pub element: usize,
    pub geom: ElementGeometry,
    pub moments: SimplexMoments,
    pub material: Material,
    basis: Bernstein,
    /// `∫ ∂_j B_α / |E|`, flat `(α, j)`.
    grad_mean: Vec<f64>,
    stiffness: DMat,
    gauge: DMat,
    alpha: f64,
    factor: Cholesky,
}

/// Recovered stress on one element: a polynomial in Bernstein form.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementStress {
    pub nv: usize,
    pub degree: usize,
    pub coeffs: Vec<SymTensor>,
    indices: Vec<bernstein::MultiIndex>,
}

/// Result of one local Neumann solve.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalSolution {
    /// Displacement coefficients with zero mean and zero mean rotation.
    pub displacement: Vec<f64>,
    pub stress: ElementStress,
    /// Weak equilibrium residual relative to the load magnitude.
    pub residual: f64,
}

impl ElementLocalSpace {
    /// Builds the space of degree `1 + k` on element `e` (`k` in `1..=3`).
    pub fn new(mesh: &Mesh, e: usize, material: &Material, k: usize) -> Result<Self, LocalError> {
        if !(1..=3).contains(&k) {
            return Err(LocalError::UnsupportedExtraDegree(k));
        }
        let geom = mesh.geometry(e);
        let d = geom.dim.n();
        let basis = Bernstein::new(d, 1 + k);
        let nb = basis.len();
        let n = nb * d;
        let q = basis.degree as f64;
        let nl = basis.lower.len();
        let g = &geom.grads;

        // ∫ ∂_j B_α ∂_l B_β = q² Σ_{i,i'} g_i[j] g_i'[l] ∫ B_{α−e_i} B_{β−e_i'}
        let mut dd = vec![0.0; nb * nb * 9];
        for a in 0..nb {
            for b in 0..nb {
                let mut acc = [[0.0; 3]; 3];
                for i in 0..=d {
                    let Some(ai) = basis.down[a][i] else { continue };
                    for i2 in 0..=d {
                        let Some(bi) = basis.down[b][i2] else { continue };
                        let m = basis.lower_gram[ai * nl + bi];
                        for j in 0..d {
                            for l in 0..d {
                                acc[j][l] += g[i][j] * g[i2][l] * m;
                            }
                        }
                    }
                }
                for j in 0..d {
                    for l in 0..d {
                        dd[(a * nb + b) * 9 + j * 3 + l] = acc[j][l] * q * q * geom.measure;
                    }
                }
            }
        }
        let (lambda, mu) = material.lame();
        let mut stiffness = DMat::zeros(n, n);
        for a in 0..nb {
            for b in 0..nb {
                let base = (a * nb + b) * 9;
                let lap: f64 = (0..d).map(|j| dd[base + j * 3 + j]).sum();
                for c in 0..d {
                    for c2 in 0..d {
                        let mut v = lambda * dd[base + c * 3 + c2] + mu * dd[base + c2 * 3 + c];
                        if c == c2 {
                            v += mu * lap;
                        }
                        stiffness[(a * d + c, b * d + c2)] = v;
                    }
                }
            }
        }

        let lower_mean = bernstein::factorial(d) * bernstein::factorial(basis.degree - 1)
            / bernstein::factorial(basis.degree - 1 + d);
        let mut grad_mean = vec![0.0; nb * d];
        for a in 0..nb {
            for i in 0..=d {
                if basis.down[a][i].is_some() {
                    for j in 0..d {
                        grad_mean[a * d + j] += q * g[i][j] * lower_mean;
                    }
                }
            }
        }

        // Gauge rows: mean displacement and mean infinitesimal rotation.
        let pairs: &[(usize, usize)] = if d == 2 { &[(0, 1)] } else { &[(1, 2), (0, 2), (0, 1)] };
        let mut gauge = DMat::zeros(d + pairs.len(), n);
        let mean = basis.mean();
        for a in 0..nb {
            for c in 0..d {
                gauge[(c, a * d + c)] = mean;
            }
            for (r, &(x, y)) in pairs.iter().enumerate() {
                gauge[(d + r, a * d + y)] += grad_mean[a * d + x];
                gauge[(d + r, a * d + x)] -= grad_mean[a * d + y];
            }
        }
        let gtg = gauge.transpose().mul(&gauge);
        let alpha = stiffness.trace() / gtg.trace();
        let mut stab = stiffness.clone();
        for (s, v) in stab.data.iter_mut().zip(&gtg.data) {
            *s += alpha * v;
        }
        let factor = Cholesky::factor(&stab).map_err(|_| LocalError::Singular { element: e })?;
        Ok(ElementLocalSpace {
            element: e,
            moments: simplex_moments(&geom),
            geom,
            material: *material,
            basis,
            grad_mean,
            stiffness,
            gauge,
            alpha,
            factor,
        })
    }

    pub fn degree(&self) -> usize {
        self.basis.degree
    }

    pub fn n_dofs(&self) -> usize {
        self.basis.len() * self.geom.dim.n()
    }

    pub fn stiffness(&self) -> &DMat {
        &self.stiffness
    }

    /// Mean displacement and mean rotation of a coefficient vector.
    pub fn gauge_values(&self, w: &[f64]) -> Vec<f64> {
        self.gauge.mul_vec(w)
    }

    /// Load vector `∫ f·v + ∫_{∂E} t·v` over the basis.
    pub fn load_vector(&self, traction: &ElementTraction, body: &BodyLoad) -> Vec<f64> {
        let d = self.geom.dim.n();
        let nv = d + 1;
        let mut rhs = vec![0.0; self.n_dofs()];
        let facet_area: [f64; 4] =
            core::array::from_fn(|k| if k < nv { self.geom.facet_normal(k).1 } else { 0.0 });
        for a in 0..self.basis.len() {
            for v in 0..nv {
                let wb = self.basis.linear_moment(a, v) * self.geom.measure;
                let fv = body.vertex_values[v];
                for c in 0..d {
                    rhs[a * d + c] += wb * fv[c];
                }
                for k in (0..nv).filter(|&k| k != v) {
                    let wf = self.basis.facet_linear_moment(a, k, v) * facet_area[k];
                    if wf != 0.0 {
                        let tv = traction.values[k][v];
                        for c in 0..d {
                            rhs[a * d + c] += wf * tv[c];
                        }
                    }
                }
            }
        }
        rhs
    }

    /// Bernstein coefficients of the rigid modes (translations, then rotations about the centroid).
    pub fn rigid_modes(&self) -> Vec<Vec<f64>> {
        let d = self.geom.dim.n();
        let nb = self.basis.len();
        let q = self.basis.degree as f64;
        let mut modes = Vec::new();
        for c in 0..d {
            let mut m = vec![0.0; nb * d];
            for a in 0..nb {
                m[a * d + c] = 1.0;
            }
            modes.push(m);
        }
        let axes: &[usize] = if d == 2 { &[2] } else { &[0, 1, 2] };
        for &ax in axes {
            let mut omega = [0.0; 3];
            omega[ax] = 1.0;
            let vals: Vec<Vec3> = (0..=d)
                .map(|v| math::cross(omega, math::sub(self.geom.vertices[v], self.geom.centroid)))
                .collect();
            let mut m = vec![0.0; nb * d];
            for (a, al) in self.basis.indices.iter().enumerate() {
                for v in 0..=d {
                    for c in 0..d {
                        m[a * d + c] += al[v] as f64 / q * vals[v][c];
                    }
                }
            }
            modes.push(m);
        }
        modes
    }

    /// Largest rigid-mode work of a load vector relative to its magnitude.
    ///
    /// Rotations are scaled by the element radius so that every mode has unit
    /// size, and all works share the largest absolute work as denominator.
    pub fn incompatibility(&self, rhs: &[f64]) -> f64 {
        let d = self.geom.dim.n();
        let radius = (0..=d)
            .map(|v| math::dist(self.geom.vertices[v], self.geom.centroid))
            .fold(0.0, f64::max);
        let works: Vec<(f64, f64)> = self
            .rigid_modes()
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let scale = if i < d { 1.0 } else { 1.0 / radius };
                m.iter()
                    .zip(rhs)
                    .fold((0.0, 0.0), |(w, s), (a, b)| (w + scale * a * b, s + math::abs(scale * a * b)))
            })
            .collect();
        let denom = works.iter().map(|(_, s)| *s).fold(0.0, f64::max);
        if denom == 0.0 {
            return 0.0;
        }
        works.iter().map(|(w, _)| math::abs(*w) / denom).fold(0.0, f64::max)
    }

    /// Gauged solution of `K w = rhs` without any compatibility check.
    pub fn solve_raw(&self, rhs: &[f64]) -> Vec<f64> {
        let mut w = self.factor.solve(rhs);
        // One refinement step on the stabilized system.
        let gw = self.gauge.mul_vec(&w);
        let kw = self.stiffness.mul_vec(&w);
        let gtgw = self.gauge.tmul_vec(&gw);
        let r: Vec<f64> = (0..rhs.len()).map(|i| rhs[i] - kw[i] - self.alpha * gtgw[i]).collect();
        let dw = self.factor.solve(&r);
        for (a, b) in w.iter_mut().zip(dw) {
            *a += b;
        }
        w
    }

    /// Weak residual `‖K w − rhs‖∞ / ‖rhs‖∞`.
    pub fn weak_residual(&self, w: &[f64], rhs: &[f64]) -> f64 {
        let kw = self.stiffness.mul_vec(w);
        let r = kw.iter().zip(rhs).fold(0.0, |m: f64, (a, b)| m.max(math::abs(a - b)));
        let s = rhs.iter().fold(0.0, |m: f64, b| m.max(math::abs(*b)));
        if s == 0.0 {
            r
        } else {
            r / s
        }
    }

    /// Stress `K ε(w)` of a coefficient vector.
    pub fn stress(&self, w: &[f64]) -> ElementStress {
        let d = self.geom.dim.n();
        let q = self.basis.degree as f64;
        let nl = self.basis.lower.len();
        let mut grads = vec![[[0.0; 3]; 3]; nl];
        for (a, down) in self.basis.down.iter().enumerate() {
            for i in 0..=d {
                let Some(b) = down[i] else { continue };
                for c in 0..d {
                    let wc = w[a * d + c];
                    if wc == 0.0 {
                        continue;
                    }
                    for j in 0..d {
                        grads[b][c][j] += q * wc * self.geom.grads[i][j];
                    }
                }
            }
        }
        let coeffs = grads.iter().map(|g| self.material.hooke_apply(&SymTensor::sym_grad(g))).collect();
        ElementStress { nv: d + 1, degree: self.basis.degree - 1, coeffs, indices: self.basis.lower.clone() }
    }

    /// `∫_E σ : ε(v)` for a constant stress and every basis function `v`.
    pub fn constant_stress_work(&self, sigma: &SymTensor) -> Vec<f64> {
        let d = self.geom.dim.n();
        let s = sigma.to_matrix();
        let mut out = vec![0.0; self.n_dofs()];
        for a in 0..self.basis.len() {
            for c in 0..d {
                out[a * d + c] =
                    self.geom.measure * (0..d).map(|j| s[c][j] * self.grad_mean[a * d + j]).sum::<f64>();
            }
        }
        out
    }
}

/// Solves the element Neumann problem `∫ K ε(w) : ε(v) = ∫ f·v + ∫_{∂E} t·v`.
///
/// Rigid modes are fixed by zero mean displacement and zero mean rotation.
/// Data whose rigid-mode work exceeds [`COMPATIBILITY_TOL`] is rejected.
pub fn solve_local_neumann(
    space: &ElementLocalSpace,
    traction: &ElementTraction,
    body: &BodyLoad,
) -> Result<LocalSolution, LocalError> {
    let rhs = space.load_vector(traction, body);
    let bad = space.incompatibility(&rhs);
    if bad > COMPATIBILITY_TOL {
        return Err(LocalError::Incompatible { element: space.element, residual: bad });
    }
    let w = space.solve_raw(&rhs);
    let residual = space.weak_residual(&w, &rhs);
    Ok(LocalSolution { stress: space.stress(&w), displacement: w, residual })
}

impl ElementStress {
    pub fn zero(nv: usize, degree: usize) -> Self {
        let indices = bernstein::multi_indices(nv, degree);
        ElementStress { nv, degree, coeffs: vec![SymTensor::ZERO; indices.len()], indices }
    }

    /// Stress at barycentric coordinates `l`.
    pub fn eval(&self, l: &[f64; 4]) -> SymTensor {
        let vals = bernstein::values(self.nv, &self.indices, l);
        let mut s = SymTensor::ZERO;
        for (c, v) in self.coeffs.iter().zip(vals) {
            for i in 0..6 {
                s.0[i] += c.0[i] * v;
            }
        }
        s
    }

    /// Divergence at barycentric coordinates `l` (`grads` are the barycentric gradients).
    pub fn divergence(&self, grads: &[Vec3; 4], l: &[f64; 4]) -> Vec3 {
        if self.degree == 0 {
            return [0.0; 3];
        }
        let lower = bernstein::multi_indices(self.nv, self.degree - 1);
        let vals = bernstein::values(self.nv, &lower, l);
        let n = self.degree as f64;
        let mut div = [0.0; 3];
        for (gi, g) in lower.iter().enumerate() {
            for i in 0..self.nv {
                let mut up = *g;
                up[i] += 1;
                let Some(pos) = self.indices.iter().position(|x| *x == up) else { continue };
                let m = self.coeffs[pos].to_matrix();
                for c in 0..3 {
                    for j in 0..3 {
                        div[c] += n * vals[gi] * m[c][j] * grads[i][j];
                    }
                }
            }
        }
        div
    }

    pub fn scale_add(&mut self, s: f64, o: &ElementStress) {
        for (a, b) in self.coeffs.iter_mut().zip(&o.coeffs) {
            *a = a.add(&b.scale(s));
        }
    }
}

/// Linear map from selected facet traction values to displacement
/// coefficients, each column balanced by its own body force.
#[derive(Debug, Clone)]
pub struct TractionOperator {
    /// Traction unknowns as `(local facet, local vertex, component)`.
    pub dofs: Vec<(usize, usize, usize)>,
    /// Column-major: `columns[j]` holds the coefficients of dof `j`.
    pub columns: Vec<Vec<f64>>,
}

impl TractionOperator {
    /// Displacement coefficients for traction values `x` (one per dof).
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.columns.first().map_or(0, |c| c.len());
        let mut w = vec![0.0; n];
        for (col, &xj) in self.columns.iter().zip(x) {
            if xj != 0.0 {
                for (a, b) in w.iter_mut().zip(col) {
                    *a += xj * b;
                }
            }
        }
        w
    }

    /// Traction on the element for values `x`.
    pub fn traction(&self, x: &[f64]) -> ElementTraction {
        let mut t = ElementTraction::zero();
        for (&(k, v, c), &xj) in self.dofs.iter().zip(x) {
            t.values[k][v][c] += xj;
        }
        t
    }
}

/// Builds the traction-to-displacement operator for the given local facets.
pub fn traction_to_stress_operator(space: &ElementLocalSpace, facets: &[usize]) -> TractionOperator {
    let d = space.geom.dim.n();
    let nv = d + 1;
    let mut dofs = Vec::new();
    for &k in facets {
        for v in (0..nv).filter(|&v| v != k) {
            for c in 0..d {
                dofs.push((k, v, c));
            }
        }
    }
    let columns = dofs
        .iter()
        .map(|&(k, v, c)| {
            let mut t = ElementTraction::zero();
            t.values[k][v][c] = 1.0;
            let bal = balancing_body_force(space.element, &space.geom, &space.moments, &t);
            let rhs = space.load_vector(&t, &bal.to_body(&space.geom));
            space.solve_raw(&rhs)
        })
        .collect();
    TractionOperator { dofs, columns }
}
