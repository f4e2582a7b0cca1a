use super::{facet_key, local_facet, FacetKey, Mesh, MeshError};
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// An edge (2D) or triangular face (3D).
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    /// Sorted node ids; `usize::MAX` pads the third entry in 2D.
    pub nodes: FacetKey,
    /// Adjacent elements, lower id first. Boundary facets use only the first slot.
    pub elements: [usize; 2],
    /// Local vertex index opposite the facet in each adjacent element.
    pub local_index: [usize; 2],
    pub n_adjacent: usize,
    /// Index into [`Topology::labels`] for labeled boundary facets.
    pub label: Option<usize>,
}

impl Facet {
    pub fn is_boundary(&self) -> bool {
        self.n_adjacent == 1
    }

    pub fn adjacent(&self) -> &[usize] {
        &self.elements[..self.n_adjacent]
    }

    /// Orientation sign of the facet as seen from element `e`.
    pub fn sign(&self, e: usize) -> f64 {
        if self.elements[0] == e {
            1.0
        } else {
            debug_assert!(self.n_adjacent == 2 && self.elements[1] == e);
            -1.0
        }
    }

    pub fn node_ids(&self, nv_facet: usize) -> &[usize] {
        &self.nodes[..nv_facet]
    }
}

/// Star patch of a vertex: the elements and facets containing it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Patch {
    pub elements: Vec<usize>,
    pub facets: Vec<usize>,
}

/// Facet table with orientation signs and vertex patches.
#[derive(Debug, Clone)]
pub struct Topology {
    pub facets: Vec<Facet>,
    /// `element_facets[e][k]` is the facet opposite local vertex `k`.
    pub element_facets: Vec<[usize; 4]>,
    pub vertex_patches: Vec<Patch>,
    pub labels: Vec<String>,
    index: BTreeMap<FacetKey, usize>,
}

impl Topology {
    pub fn n_facets(&self) -> usize {
        self.facets.len()
    }

    pub fn facet_id(&self, key: &FacetKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn label_id(&self, name: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == name)
    }

    pub fn label_name(&self, facet: usize) -> Option<&str> {
        self.facets[facet].label.map(|l| self.labels[l].as_str())
    }

    /// Orientation sign η of `facet` relative to element `e`.
    pub fn sign(&self, facet: usize, e: usize) -> f64 {
        self.facets[facet].sign(e)
    }

    /// Elements sharing a facet with `e`.
    pub fn neighbors(&self, e: usize, nv: usize) -> impl Iterator<Item = usize> + '_ {
        self.element_facets[e][..nv].iter().filter_map(move |&f| {
            let fa = &self.facets[f];
            (fa.n_adjacent == 2).then(|| if fa.elements[0] == e { fa.elements[1] } else { fa.elements[0] })
        })
    }
}

/// Deduplicates facets, assigns orientation signs and assembles vertex patches.
///
/// Interior facets are oriented by their lower-id element (η = +1), the other
/// side sees η = −1. Boundary facets have η = +1.
pub fn build_topology(mesh: &Mesh) -> Result<Topology, MeshError> {
    let dim = mesh.dim();
    let nv = dim.nv();
    let labels = mesh.label_names();
    let mut index: BTreeMap<FacetKey, usize> = BTreeMap::new();
    let mut facets: Vec<Facet> = Vec::new();
    let mut element_facets = vec![[usize::MAX; 4]; mesh.n_elements()];
    for e in 0..mesh.n_elements() {
        let el = mesh.elements[e];
        for k in 0..nv {
            let nodes = local_facet(dim, &el, k);
            let key = facet_key(&nodes);
            let id = *index.entry(key).or_insert_with(|| {
                facets.push(Facet {
                    nodes: key,
                    elements: [usize::MAX; 2],
                    local_index: [usize::MAX; 2],
                    n_adjacent: 0,
                    label: None,
                });
                facets.len() - 1
            });
            let f = &mut facets[id];
            if f.n_adjacent == 2 {
                return Err(MeshError::NonManifold(nodes));
            }
            // Elements are visited in increasing id, so slot 0 holds the lower id.
            f.elements[f.n_adjacent] = e;
            f.local_index[f.n_adjacent] = k;
            f.n_adjacent += 1;
            element_facets[e][k] = id;
        }
    }
    for (key, name) in mesh.boundary_labels() {
        if let Some(&id) = index.get(key) {
            facets[id].label = labels.iter().position(|l| l == name);
        }
    }
    let mut vertex_patches = vec![Patch::default(); mesh.n_nodes()];
    for e in 0..mesh.n_elements() {
        for &n in mesh.element(e) {
            vertex_patches[n].elements.push(e);
        }
    }
    for (id, f) in facets.iter().enumerate() {
        for &n in &f.nodes[..dim.n()] {
            vertex_patches[n].facets.push(id);
        }
    }
    Ok(Topology { facets, element_facets, vertex_patches, labels, index })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_structured, Dim, Grid};

    #[test]
    fn two_triangle_square() {
        let m = generate_structured(&Grid::rectangle([0.0, 0.0], [1.0, 1.0], 1, 1)).unwrap();
        let t = build_topology(&m).unwrap();
        assert_eq!(t.n_facets(), 5);
        let interior: Vec<_> = t.facets.iter().filter(|f| !f.is_boundary()).collect();
        assert_eq!(interior.len(), 1);
        let f = interior[0];
        assert_eq!(f.sign(f.elements[0]) + f.sign(f.elements[1]), 0.0);
        assert_eq!(f.sign(0), 1.0);
    }

    #[test]
    fn single_triangle_has_positive_boundary_signs() {
        let m = Mesh::new(
            Dim::Two,
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            vec![[0, 1, 2, 0]],
            BTreeMap::new(),
        )
        .unwrap();
        let t = build_topology(&m).unwrap();
        assert_eq!(t.n_facets(), 3);
        assert!(t.facets.iter().all(|f| f.is_boundary() && f.sign(0) == 1.0));
    }

    #[test]
    fn euler_characteristic_of_structured_square() {
        let m = generate_structured(&Grid::rectangle([0.0, 0.0], [1.0, 1.0], 2, 2)).unwrap();
        let t = build_topology(&m).unwrap();
        let (v, e, f) = (m.n_nodes() as i64, t.n_facets() as i64, m.n_elements() as i64);
        assert_eq!(v - e + f, 1);
        let n_boundary = t.facets.iter().filter(|f| f.is_boundary()).count();
        // 3 * triangles = 2 * interior + boundary
        assert_eq!((3 * m.n_elements() - n_boundary) / 2, 8);
        assert_eq!(t.facets.iter().filter(|f| !f.is_boundary()).count(), 8);
    }

    #[test]
    fn patches_hold_incident_facets() {
        let m = generate_structured(&Grid::cuboid([0.0; 3], [1.0; 3], [2, 1, 1])).unwrap();
        let t = build_topology(&m).unwrap();
        for (v, p) in t.vertex_patches.iter().enumerate() {
            for &f in &p.facets {
                assert!(t.facets[f].nodes.contains(&v));
            }
            let n_incident = t.facets.iter().filter(|f| f.nodes[..3].contains(&v)).count();
            assert_eq!(n_incident, p.facets.len());
        }
        for f in &t.facets {
            assert!(f.is_boundary() || f.sign(f.elements[0]) == -f.sign(f.elements[1]));
        }
    }

    #[test]
    fn non_manifold_facets_are_rejected() {
        let nodes = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0], [1.0, 1.0, 0.0]];
        let m = Mesh::new(Dim::Two, nodes, vec![[0, 1, 2, 0], [0, 1, 3, 0], [0, 1, 4, 0]], BTreeMap::new()).unwrap();
        assert!(matches!(build_topology(&m), Err(MeshError::NonManifold(_))));
    }
}
