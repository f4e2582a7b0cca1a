use crate::elasticity::SymTensor;
use crate::math::{self, Vec3};
use crate::mesh::{Dim, ElementGeometry};

/// Measure, centroid and unit-density inertia of a simplex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexMoments {
    pub measure: f64,
    pub centroid: Vec3,
    /// `∫ (|r|² I − r rᵀ)` with `r = x − G`. In 2D only the polar entry
    /// `inertia[2][2] = ∫ |r|²` is meaningful.
    pub inertia: [[f64; 3]; 3],
}

impl SimplexMoments {
    /// Scalar inertia about the out-of-plane axis through `G` (2D).
    pub fn polar(&self) -> f64 {
        self.inertia[2][2]
    }
}

/// Exact geometric moments of a simplex.
pub fn simplex_moments(geom: &ElementGeometry) -> SimplexMoments {
    let d = geom.dim.n();
    let g = geom.centroid;
    // ∫ r_i r_j = |E| / ((d+1)(d+2)) Σ_v a_vi a_vj with a_v = x_v − G.
    let mut second = [[0.0; 3]; 3];
    for v in 0..=d {
        let a = math::sub(geom.vertices[v], g);
        for i in 0..3 {
            for j in 0..3 {
                second[i][j] += a[i] * a[j];
            }
        }
    }
    let c = geom.measure / ((d + 1) * (d + 2)) as f64;
    let tr = (second[0][0] + second[1][1] + second[2][2]) * c;
    let mut inertia = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            inertia[i][j] = if i == j { tr } else { 0.0 } - c * second[i][j];
        }
    }
    SimplexMoments { measure: geom.measure, centroid: g, inertia }
}

/// Piecewise linear traction on the facets of one element, as seen by that
/// element (already multiplied by the orientation sign).
///
/// `values[k][v]` is the traction at local vertex `v` on the facet opposite
/// local vertex `k`; entries with `v == k` are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ElementTraction {
    pub values: [[Vec3; 4]; 4],
}

impl ElementTraction {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Traction `σ n` of a constant stress on every facet.
    pub fn from_stress(geom: &ElementGeometry, sigma: &SymTensor) -> Self {
        let mut t = Self::zero();
        for k in 0..geom.dim.nv() {
            let (n, _) = geom.facet_normal(k);
            let tv = sigma.apply(&n);
            for v in 0..geom.dim.nv() {
                if v != k {
                    t.values[k][v] = tv;
                }
            }
        }
        t
    }

    pub fn add(&self, o: &ElementTraction) -> ElementTraction {
        let mut t = *self;
        for k in 0..4 {
            for v in 0..4 {
                t.values[k][v] = math::add(t.values[k][v], o.values[k][v]);
            }
        }
        t
    }

    /// Resultant force `∫_{∂E} t` and moment `∫_{∂E} (x − G) ∧ t`.
    pub fn resultants(&self, geom: &ElementGeometry) -> (Vec3, Vec3) {
        let d = geom.dim.n();
        let nv = d + 1;
        // ∫_F λ_u λ_v = |F| (1 + δ_uv) (d−1)! / (d+1)!
        let pair = if d == 2 { 1.0 / 6.0 } else { 1.0 / 12.0 };
        let mut force = [0.0; 3];
        let mut moment = [0.0; 3];
        for k in 0..nv {
            let (_, area) = geom.facet_normal(k);
            for v in (0..nv).filter(|&v| v != k) {
                let tv = self.values[k][v];
                force = math::add(force, math::scale(tv, area / d as f64));
                for u in (0..nv).filter(|&u| u != k) {
                    let w = area * pair * if u == v { 2.0 } else { 1.0 };
                    let a = math::sub(geom.vertices[u], geom.centroid);
                    moment = math::add(moment, math::scale(math::cross(a, tv), w));
                }
            }
        }
        (force, moment)
    }
}

/// Linear body force on one element, stored by its vertex values.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyLoad {
    pub vertex_values: [Vec3; 4],
}

impl BodyLoad {
    pub fn constant(f: Vec3) -> Self {
        BodyLoad { vertex_values: [f; 4] }
    }

    pub fn add(&self, o: &BodyLoad) -> BodyLoad {
        BodyLoad { vertex_values: core::array::from_fn(|v| math::add(self.vertex_values[v], o.vertex_values[v])) }
    }

    /// Resultant force and moment about the centroid.
    pub fn resultants(&self, geom: &ElementGeometry) -> (Vec3, Vec3) {
        let d = geom.dim.n();
        let nv = d + 1;
        let mut force = [0.0; 3];
        let mut moment = [0.0; 3];
        // ∫_E λ_u λ_v = |E| (1 + δ_uv) d! / (d+2)!
        let pair = geom.measure / ((d + 1) * (d + 2)) as f64;
        for v in 0..nv {
            let fv = self.vertex_values[v];
            force = math::add(force, math::scale(fv, geom.measure / nv as f64));
            for u in 0..nv {
                let a = math::sub(geom.vertices[u], geom.centroid);
                let w = pair * if u == v { 2.0 } else { 1.0 };
                moment = math::add(moment, math::scale(math::cross(a, fv), w));
            }
        }
        (force, moment)
    }
}

/// Body force `c + Ω ∧ (x − G)` balancing a boundary traction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalancedLoad {
    pub element: usize,
    /// Constant part `c`.
    pub constant: Vec3,
    /// Rotational amplitude `Ω` (only the z entry in 2D).
    pub rotation: Vec3,
    pub centroid: Vec3,
}

impl BalancedLoad {
    pub fn eval(&self, x: &Vec3) -> Vec3 {
        math::add(self.constant, math::cross(self.rotation, math::sub(*x, self.centroid)))
    }

    pub fn to_body(&self, geom: &ElementGeometry) -> BodyLoad {
        BodyLoad { vertex_values: core::array::from_fn(|v| self.eval(&geom.vertices[v])) }
    }
}

/// Body force that equilibrates `traction` on element `element`.
///
/// Its resultant cancels the traction resultant and its moment about the
/// centroid cancels the traction moment.
pub fn balancing_body_force(
    element: usize,
    geom: &ElementGeometry,
    moments: &SimplexMoments,
    traction: &ElementTraction,
) -> BalancedLoad {
    let (force, moment) = traction.resultants(geom);
    let constant = math::scale(force, -1.0 / moments.measure);
    let rotation = match geom.dim {
        Dim::Two => [0.0, 0.0, -moment[2] / moments.polar()],
        Dim::Three => {
            let (inv, _) = math::inverse(&moments.inertia, 3);
            let r: Vec3 = core::array::from_fn(|i| -(0..3).map(|j| inv[i][j] * moment[j]).sum::<f64>());
            r
        }
    };
    BalancedLoad { element, constant, rotation, centroid: moments.centroid }
}
