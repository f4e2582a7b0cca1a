use super::{facet_key, Dim, FacetKey, Mesh, MeshError};
use crate::math;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

/// Relation between a refined mesh and the mesh it was refined from.
#[derive(Debug, Clone, PartialEq)]
pub struct RefineMap {
    /// Coarse element containing each fine element.
    pub element_parent: Vec<usize>,
}

impl RefineMap {
    fn identity(mesh: &Mesh) -> Self {
        RefineMap { element_parent: (0..mesh.n_elements()).collect() }
    }

    /// Composition `self ∘ finer`: maps the finest mesh to the coarsest.
    fn then(&self, finer: &RefineMap) -> RefineMap {
        RefineMap { element_parent: finer.element_parent.iter().map(|&p| self.element_parent[p]).collect() }
    }
}

/// Midpoint refinement repeated `levels` times.
pub fn uniform_refine(mesh: &Mesh, levels: usize) -> Mesh {
    let mut m = mesh.clone();
    for _ in 0..levels {
        m = refine_once(&m).0;
    }
    m
}

/// Refines `levels` times and returns the map from the final mesh to `mesh`.
pub fn uniform_refine_with_map(mesh: &Mesh, levels: usize) -> (Mesh, RefineMap) {
    let mut m = mesh.clone();
    let mut map = RefineMap::identity(mesh);
    for level in 0..levels {
        let (fine, step) = refine_once(&m);
        map = if level == 0 { step } else { map.then(&step) };
        m = fine;
    }
    (m, map)
}

fn refine_once(mesh: &Mesh) -> (Mesh, RefineMap) {
    let dim = mesh.dim();
    let mut nodes = mesh.nodes().to_vec();
    let mut mid: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut midpoint = |a: usize, b: usize, nodes: &mut Vec<[f64; 3]>| -> usize {
        let key = if a < b { (a, b) } else { (b, a) };
        *mid.entry(key).or_insert_with(|| {
            nodes.push(math::scale(math::add(nodes[a], nodes[b]), 0.5));
            nodes.len() - 1
        })
    };
    let mut elements = Vec::new();
    let mut element_parent = Vec::new();
    for (e, el) in mesh.elements().enumerate() {
        match dim {
            Dim::Two => {
                let [a, b, c] = [el[0], el[1], el[2]];
                let ab = midpoint(a, b, &mut nodes);
                let bc = midpoint(b, c, &mut nodes);
                let ca = midpoint(c, a, &mut nodes);
                for child in [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]] {
                    elements.push([child[0], child[1], child[2], 0]);
                    element_parent.push(e);
                }
            }
            Dim::Three => {
                let v = [el[0], el[1], el[2], el[3]];
                let mut m = [[0usize; 4]; 4];
                for i in 0..4 {
                    for j in i + 1..4 {
                        let id = midpoint(v[i], v[j], &mut nodes);
                        m[i][j] = id;
                        m[j][i] = id;
                    }
                }
                for i in 0..4 {
                    let o: Vec<usize> = (0..4).filter(|&j| j != i).collect();
                    elements.push([v[i], m[i][o[0]], m[i][o[1]], m[i][o[2]]]);
                    element_parent.push(e);
                }
                // Central octahedron: opposite midpoint pairs are (01,23), (02,13), (03,12).
                let pairs = [(m[0][1], m[2][3]), (m[0][2], m[1][3]), (m[0][3], m[1][2])];
                let len = |p: (usize, usize)| math::dist(nodes[p.0], nodes[p.1]);
                let mut d = 0;
                for k in 1..3 {
                    if len(pairs[k]) < len(pairs[d]) - 1e-12 * len(pairs[d]) {
                        d = k;
                    }
                }
                let (p, q) = (pairs[(d + 1) % 3], pairs[(d + 2) % 3]);
                let ring = [p.0, q.0, p.1, q.1];
                for k in 0..4 {
                    elements.push([pairs[d].0, pairs[d].1, ring[k], ring[(k + 1) % 4]]);
                    element_parent.push(e);
                }
            }
        }
    }
    let mut labels: BTreeMap<FacetKey, String> = BTreeMap::new();
    for (key, name) in mesh.boundary_labels() {
        let f = &key[..dim.n()];
        let children: Vec<Vec<usize>> = match dim {
            Dim::Two => {
                let m = mid[&(f[0], f[1])];
                alloc::vec![alloc::vec![f[0], m], alloc::vec![m, f[1]]]
            }
            Dim::Three => {
                let m = |a: usize, b: usize| mid[&(a.min(b), a.max(b))];
                let (a, b, c) = (f[0], f[1], f[2]);
                alloc::vec![
                    alloc::vec![a, m(a, b), m(a, c)],
                    alloc::vec![b, m(a, b), m(b, c)],
                    alloc::vec![c, m(a, c), m(b, c)],
                    alloc::vec![m(a, b), m(b, c), m(a, c)],
                ]
            }
        };
        for ch in children {
            labels.insert(facet_key(&ch), name.clone());
        }
    }
    let fine = Mesh::new(dim, nodes, elements, labels).expect("refinement of a valid mesh is valid");
    (fine, RefineMap { element_parent })
}

/// Checks that every fine element lies inside its mapped coarse parent.
pub fn check_nesting(coarse: &Mesh, fine: &Mesh, map: &RefineMap) -> Result<(), MeshError> {
    if fine.dim() != coarse.dim() || map.element_parent.len() != fine.n_elements() {
        return Err(MeshError::NotNested("element map does not match the fine mesh"));
    }
    for e in 0..fine.n_elements() {
        let p = map.element_parent[e];
        if p >= coarse.n_elements() {
            return Err(MeshError::NotNested("parent element out of range"));
        }
        let g = coarse.geometry(p);
        let c = fine.geometry(e).centroid;
        let scale = math::abs(g.measure);
        if g.barycentric(&c).iter().take(coarse.dim().nv()).any(|&l| l < -1e-10) || scale <= 0.0 {
            return Err(MeshError::NotNested("fine element lies outside its parent"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_topology, generate_structured, radius_ratio, Grid};
    use alloc::collections::BTreeMap;
    use alloc::vec;

    #[test]
    fn element_counts_and_measure() {
        let tri = Mesh::new(
            Dim::Two,
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            vec![[0, 1, 2, 0]],
            BTreeMap::new(),
        )
        .unwrap();
        assert_eq!(uniform_refine(&tri, 1).n_elements(), 4);
        let tet = Mesh::new(
            Dim::Three,
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            vec![[0, 1, 2, 3]],
            BTreeMap::new(),
        )
        .unwrap();
        let fine = uniform_refine(&tet, 3);
        assert_eq!(fine.n_elements(), 512);
        assert!((fine.total_measure() - 1.0 / 6.0).abs() < 1e-12 / 6.0);
        let sq = generate_structured(&Grid::rectangle([0.0, 0.0], [1.0, 1.0], 1, 1)).unwrap();
        assert_eq!(uniform_refine(&sq, 1).n_nodes(), 9);
    }

    #[test]
    fn labels_are_inherited_and_cover_the_boundary() {
        let m = generate_structured(&Grid::cuboid([0.0; 3], [1.0; 3], [1, 2, 1])).unwrap();
        let fine = uniform_refine(&m, 2);
        let t = build_topology(&fine).unwrap();
        for f in &t.facets {
            assert_eq!(f.is_boundary(), f.label.is_some());
        }
        let q = (0..fine.n_elements()).map(|e| radius_ratio(Dim::Three, &fine.coords(e)).unwrap());
        assert!(q.fold(1.0, f64::min) > 0.05);
    }

    #[test]
    fn map_points_to_containing_parent() {
        let m = generate_structured(&Grid::rectangle([0.0, 0.0], [2.0, 1.0], 3, 2)).unwrap();
        let (fine, map) = uniform_refine_with_map(&m, 2);
        assert_eq!(fine.n_elements(), 16 * m.n_elements());
        check_nesting(&m, &fine, &map).unwrap();
        let cube = generate_structured(&Grid::cuboid([0.0; 3], [1.0; 3], [1, 1, 1])).unwrap();
        let (fine3, map3) = uniform_refine_with_map(&cube, 2);
        check_nesting(&cube, &fine3, &map3).unwrap();
    }
}
