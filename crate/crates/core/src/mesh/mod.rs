//! Simplicial meshes: storage, geometry, topology, quality metrics,
//! structured generation and uniform refinement.

mod generate;
mod quality;
mod refine;
mod topology;

pub use generate::{
    generate_structured, l_shape, plate_with_hole_2d, plate_with_hole_3d, Grid, PlateHole2d, PlateHole3d,
};
pub use quality::{edge_or_area_ratio, quality_metrics, radius_ratio, QualityMetrics};
pub use refine::{check_nesting, uniform_refine, uniform_refine_with_map, RefineMap};
pub use topology::{build_topology, Facet, Patch, Topology};

use crate::math::{self, Vec3};
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

/// Spatial dimension of a mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dim {
    Two,
    Three,
}

impl Dim {
    pub fn n(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }

    /// Vertices per element.
    pub fn nv(self) -> usize {
        self.n() + 1
    }

    /// Independent stress components (3 or 6).
    pub fn n_stress(self) -> usize {
        match self {
            Dim::Two => 3,
            Dim::Three => 6,
        }
    }

    /// Rigid body modes (3 or 6).
    pub fn n_rigid(self) -> usize {
        self.n_stress()
    }

    pub fn from_usize(d: usize) -> Option<Dim> {
        match d {
            2 => Some(Dim::Two),
            3 => Some(Dim::Three),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeshError {
    #[error("element {element} references node {node}, but the mesh has {n_nodes} nodes")]
    NodeOutOfRange { element: usize, node: usize, n_nodes: usize },
    #[error("element {0} is degenerate (measure below threshold)")]
    Degenerate(usize),
    #[error("boundary label `{label}` is attached to a facet that is not on the boundary")]
    LabelNotOnBoundary { label: String },
    #[error("facet {0:?} is shared by more than two elements")]
    NonManifold(Vec<usize>),
    #[error("invalid generator input: {0}")]
    Generator(&'static str),
    #[error("meshes are not nested: {0}")]
    NotNested(&'static str),
}

/// Sorted node ids of a facet. In 2D the last entry is `usize::MAX`.
pub type FacetKey = [usize; 3];

pub(crate) fn facet_key(nodes: &[usize]) -> FacetKey {
    let mut k = [usize::MAX; 3];
    k[..nodes.len()].copy_from_slice(nodes);
    k[..nodes.len()].sort_unstable();
    k
}

/// Simplicial mesh of triangles or tetrahedra.
///
/// Nodes always carry three coordinates; in 2D the third is zero. Elements are
/// stored as `[usize; 4]`; for triangles the last entry is unused and set to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    dim: Dim,
    nodes: Vec<Vec3>,
    elements: Vec<[usize; 4]>,
    boundary_labels: BTreeMap<FacetKey, String>,
}

impl Mesh {
    /// Builds a mesh, reorienting elements to positive measure.
    ///
    /// Labels may only be attached to facets that belong to exactly one element.
    pub fn new(
        dim: Dim,
        nodes: Vec<Vec3>,
        mut elements: Vec<[usize; 4]>,
        boundary_labels: BTreeMap<FacetKey, String>,
    ) -> Result<Self, MeshError> {
        let nv = dim.nv();
        for (e, el) in elements.iter().enumerate() {
            for &n in &el[..nv] {
                if n >= nodes.len() {
                    return Err(MeshError::NodeOutOfRange { element: e, node: n, n_nodes: nodes.len() });
                }
            }
        }
        for el in elements.iter_mut() {
            el[nv..].fill(0);
        }
        let threshold = 1e-14 * bounding_box_measure(dim, &nodes);
        for (e, el) in elements.iter_mut().enumerate() {
            let vol = signed_measure(dim, &nodes, el);
            if math::abs(vol) <= threshold || !vol.is_finite() {
                return Err(MeshError::Degenerate(e));
            }
            if vol < 0.0 {
                el.swap(0, 1);
            }
        }
        if !boundary_labels.is_empty() {
            let mut count: BTreeMap<FacetKey, u32> = BTreeMap::new();
            for el in &elements {
                for k in 0..nv {
                    *count.entry(facet_key(&local_facet(dim, el, k))).or_insert(0) += 1;
                }
            }
            for (key, label) in &boundary_labels {
                if count.get(key).copied() != Some(1) {
                    return Err(MeshError::LabelNotOnBoundary { label: label.clone() });
                }
            }
        }
        Ok(Mesh { dim, nodes, elements, boundary_labels })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    /// Node ids of element `e` (3 or 4 entries).
    pub fn element(&self, e: usize) -> &[usize] {
        &self.elements[e][..self.dim.nv()]
    }

    pub fn elements(&self) -> impl Iterator<Item = &[usize]> + '_ {
        let nv = self.dim.nv();
        self.elements.iter().map(move |el| &el[..nv])
    }

    pub fn boundary_labels(&self) -> &BTreeMap<FacetKey, String> {
        &self.boundary_labels
    }

    /// Distinct label names in sorted order.
    pub fn label_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.boundary_labels.values().cloned().collect();
        names.sort();
        names.dedup();
        names
    }

    pub fn coords(&self, e: usize) -> [Vec3; 4] {
        let el = &self.elements[e];
        let mut x = [[0.0; 3]; 4];
        for k in 0..self.dim.nv() {
            x[k] = self.nodes[el[k]];
        }
        x
    }

    pub fn measure(&self, e: usize) -> f64 {
        signed_measure(self.dim, &self.nodes, &self.elements[e])
    }

    pub fn total_measure(&self) -> f64 {
        (0..self.n_elements()).map(|e| self.measure(e)).sum()
    }

    pub fn geometry(&self, e: usize) -> ElementGeometry {
        ElementGeometry::new(self.dim, &self.coords(e))
    }

    /// Largest distance between two nodes of the bounding box.
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = bounding_box(&self.nodes);
        math::dist(lo, hi)
    }
}

/// Node ids of the facet opposite local vertex `k`, in the cyclic order
/// used throughout the crate.
pub(crate) fn local_facet(dim: Dim, el: &[usize; 4], k: usize) -> Vec<usize> {
    let nv = dim.nv();
    (1..nv).map(|j| el[(k + j) % nv]).collect()
}

fn bounding_box(nodes: &[Vec3]) -> (Vec3, Vec3) {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in nodes {
        for i in 0..3 {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    (lo, hi)
}

fn bounding_box_measure(dim: Dim, nodes: &[Vec3]) -> f64 {
    if nodes.is_empty() {
        return 0.0;
    }
    let (lo, hi) = bounding_box(nodes);
    (0..dim.n()).map(|i| hi[i] - lo[i]).product()
}

pub(crate) fn signed_measure(dim: Dim, nodes: &[Vec3], el: &[usize; 4]) -> f64 {
    let p0 = nodes[el[0]];
    let a = math::sub(nodes[el[1]], p0);
    let b = math::sub(nodes[el[2]], p0);
    match dim {
        Dim::Two => 0.5 * (a[0] * b[1] - a[1] * b[0]),
        Dim::Three => {
            let c = math::sub(nodes[el[3]], p0);
            math::dot(a, math::cross(b, c)) / 6.0
        }
    }
}

/// Affine geometry of one simplex.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    pub dim: Dim,
    pub vertices: [Vec3; 4],
    pub measure: f64,
    pub centroid: Vec3,
    /// Gradients of the barycentric coordinates.
    pub grads: [Vec3; 4],
    /// Columns are the edge vectors `x_k - x_0`.
    pub jacobian: [[f64; 3]; 3],
    pub jacobian_inv: [[f64; 3]; 3],
}

impl ElementGeometry {
    pub fn new(dim: Dim, x: &[Vec3; 4]) -> Self {
        let d = dim.n();
        let mut jac = [[0.0; 3]; 3];
        for k in 0..d {
            let ek = math::sub(x[k + 1], x[0]);
            for i in 0..d {
                jac[i][k] = ek[i];
            }
        }
        let (inv, det) = math::inverse(&jac, d);
        let measure = if d == 2 { 0.5 * det } else { det / 6.0 };
        let mut grads = [[0.0; 3]; 4];
        for k in 0..d {
            for i in 0..d {
                grads[k + 1][i] = inv[k][i];
                grads[0][i] -= inv[k][i];
            }
        }
        let mut centroid = [0.0; 3];
        for v in x.iter().take(d + 1) {
            centroid = math::add(centroid, *v);
        }
        centroid = math::scale(centroid, 1.0 / (d + 1) as f64);
        ElementGeometry { dim, vertices: *x, measure, centroid, grads, jacobian: jac, jacobian_inv: inv }
    }

    /// Physical point of reference coordinates `xi`.
    pub fn map(&self, xi: &[f64; 3]) -> Vec3 {
        let mut p = self.vertices[0];
        for i in 0..3 {
            for k in 0..self.dim.n() {
                p[i] += self.jacobian[i][k] * xi[k];
            }
        }
        p
    }

    /// Barycentric coordinates of a physical point.
    pub fn barycentric(&self, p: &Vec3) -> [f64; 4] {
        let d = self.dim.n();
        let r = math::sub(*p, self.vertices[0]);
        let mut l = [0.0; 4];
        let mut s = 0.0;
        for k in 0..d {
            l[k + 1] = (0..d).map(|i| self.jacobian_inv[k][i] * r[i]).sum();
            s += l[k + 1];
        }
        l[0] = 1.0 - s;
        l
    }

    /// Outward unit normal and measure of the facet opposite local vertex `k`.
    pub fn facet_normal(&self, k: usize) -> (Vec3, f64) {
        let g = self.grads[k];
        let gn = math::norm(g);
        let n = math::scale(g, -1.0 / gn);
        // |F| = d |E| |grad lambda_k|
        let area = self.dim.n() as f64 * self.measure * gn;
        (n, area)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn unit_triangle() -> Mesh {
        Mesh::new(Dim::Two, vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], vec![[0, 1, 2, 0]], BTreeMap::new())
            .unwrap()
    }

    #[test]
    fn clockwise_elements_are_reoriented() {
        let m =
            Mesh::new(Dim::Two, vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], vec![[0, 2, 1, 0]], BTreeMap::new())
                .unwrap();
        assert!((m.measure(0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn degenerate_and_dangling_elements_are_rejected() {
        let nodes = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let err = Mesh::new(Dim::Two, nodes.clone(), vec![[0, 1, 2, 0]], BTreeMap::new()).unwrap_err();
        assert_eq!(err, MeshError::Degenerate(0));
        let err = Mesh::new(Dim::Two, nodes, vec![[0, 1, 7, 0]], BTreeMap::new()).unwrap_err();
        assert!(matches!(err, MeshError::NodeOutOfRange { node: 7, .. }));
    }

    #[test]
    fn labels_must_sit_on_the_boundary() {
        let nodes = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]];
        let mut labels = BTreeMap::new();
        labels.insert(facet_key(&[0, 2]), String::from("diag"));
        let err = Mesh::new(Dim::Two, nodes, vec![[0, 1, 2, 0], [0, 2, 3, 0]], labels).unwrap_err();
        assert!(matches!(err, MeshError::LabelNotOnBoundary { .. }));
    }

    #[test]
    fn geometry_gradients_and_normals() {
        let m = unit_triangle();
        let g = m.geometry(0);
        assert!((g.measure - 0.5).abs() < 1e-15);
        assert_eq!(g.grads[0], [-1.0, -1.0, 0.0]);
        let (n, len) = g.facet_normal(0);
        assert!((len - 2f64.sqrt()).abs() < 1e-14);
        assert!((n[0] - 0.5f64.sqrt()).abs() < 1e-14 && (n[1] - 0.5f64.sqrt()).abs() < 1e-14);
        let l = g.barycentric(&[0.25, 0.5, 0.0]);
        assert!((l[0] - 0.25).abs() < 1e-15 && (l[2] - 0.5).abs() < 1e-15);
    }
}
