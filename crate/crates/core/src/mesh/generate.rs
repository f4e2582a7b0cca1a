use super::{facet_key, Dim, FacetKey, Mesh, MeshError};
use crate::math::{self, Vec3};
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

/// Axis-aligned rectangle or box with subdivision counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub dim: Dim,
    pub lower: Vec3,
    pub upper: Vec3,
    pub divisions: [usize; 3],
}

impl Grid {
    pub fn rectangle(lower: [f64; 2], upper: [f64; 2], nx: usize, ny: usize) -> Self {
        Grid {
            dim: Dim::Two,
            lower: [lower[0], lower[1], 0.0],
            upper: [upper[0], upper[1], 0.0],
            divisions: [nx, ny, 1],
        }
    }

    pub fn cuboid(lower: Vec3, upper: Vec3, divisions: [usize; 3]) -> Self {
        Grid { dim: Dim::Three, lower, upper, divisions }
    }
}

struct Labeler {
    labels: BTreeMap<FacetKey, String>,
}

impl Labeler {
    fn new() -> Self {
        Labeler { labels: BTreeMap::new() }
    }

    fn add(&mut self, nodes: &[usize], name: &str) {
        self.labels.insert(facet_key(nodes), name.to_string());
    }
}

/// Structured simplicial mesh of a rectangle or box.
///
/// Rectangles use alternating diagonals (2·nx·ny triangles); boxes are cut
/// into six Kuhn tetrahedra per cell. Boundary facets are labeled
/// `left`/`right` (x), `bottom`/`top` (y) and `front`/`back` (z).
pub fn generate_structured(grid: &Grid) -> Result<Mesh, MeshError> {
    let n = grid.dim.n();
    if grid.divisions[..n].contains(&0) {
        return Err(MeshError::Generator("subdivision counts must be at least 1"));
    }
    if (0..n).any(|i| grid.upper[i] <= grid.lower[i]) {
        return Err(MeshError::Generator("extents must be positive"));
    }
    match grid.dim {
        Dim::Two => Ok(rectangle(grid)),
        Dim::Three => Ok(cuboid(grid)),
    }
}

fn rectangle(grid: &Grid) -> Mesh {
    let [nx, ny, _] = grid.divisions;
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut nodes = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            let x = grid.lower[0] + (grid.upper[0] - grid.lower[0]) * i as f64 / nx as f64;
            let y = grid.lower[1] + (grid.upper[1] - grid.lower[1]) * j as f64 / ny as f64;
            nodes.push([x, y, 0.0]);
        }
    }
    let mut elements = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if (i + j) % 2 == 0 {
                elements.push([a, b, c, 0]);
                elements.push([a, c, d, 0]);
            } else {
                elements.push([a, b, d, 0]);
                elements.push([b, c, d, 0]);
            }
        }
    }
    let mut lab = Labeler::new();
    for i in 0..nx {
        lab.add(&[id(i, 0), id(i + 1, 0)], "bottom");
        lab.add(&[id(i, ny), id(i + 1, ny)], "top");
    }
    for j in 0..ny {
        lab.add(&[id(0, j), id(0, j + 1)], "left");
        lab.add(&[id(nx, j), id(nx, j + 1)], "right");
    }
    Mesh::new(Dim::Two, nodes, elements, lab.labels).expect("structured rectangle is valid")
}

fn cuboid(grid: &Grid) -> Mesh {
    let [nx, ny, nz] = grid.divisions;
    let id = |i: usize, j: usize, k: usize| (k * (ny + 1) + j) * (nx + 1) + i;
    let mut nodes = Vec::new();
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                let t = [i as f64 / nx as f64, j as f64 / ny as f64, k as f64 / nz as f64];
                nodes.push([0, 1, 2].map(|a| grid.lower[a] + (grid.upper[a] - grid.lower[a]) * t[a]));
            }
        }
    }
    // Kuhn split of the unit cube along the main diagonal 0 -> 7.
    const PATHS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut elements = Vec::new();
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                for path in PATHS {
                    let mut c = [i, j, k];
                    let mut tet = [id(c[0], c[1], c[2]), 0, 0, 0];
                    for (s, &axis) in path.iter().enumerate() {
                        c[axis] += 1;
                        tet[s + 1] = id(c[0], c[1], c[2]);
                    }
                    elements.push(tet);
                }
            }
        }
    }
    let mut lab = Labeler::new();
    let mut quad = |q: [usize; 4], name: &str| {
        // Boundary quads are split along the diagonal through the corner
        // closest to the box origin, matching the Kuhn diagonals.
        lab.add(&[q[0], q[1], q[2]], name);
        lab.add(&[q[0], q[2], q[3]], name);
    };
    for k in 0..nz {
        for j in 0..ny {
            quad([id(0, j, k), id(0, j + 1, k), id(0, j + 1, k + 1), id(0, j, k + 1)], "left");
            quad([id(nx, j, k), id(nx, j + 1, k), id(nx, j + 1, k + 1), id(nx, j, k + 1)], "right");
        }
    }
    for k in 0..nz {
        for i in 0..nx {
            quad([id(i, 0, k), id(i + 1, 0, k), id(i + 1, 0, k + 1), id(i, 0, k + 1)], "bottom");
            quad([id(i, ny, k), id(i + 1, ny, k), id(i + 1, ny, k + 1), id(i, ny, k + 1)], "top");
        }
    }
    for j in 0..ny {
        for i in 0..nx {
            quad([id(i, j, 0), id(i + 1, j, 0), id(i + 1, j + 1, 0), id(i, j + 1, 0)], "front");
            quad([id(i, j, nz), id(i + 1, j, nz), id(i + 1, j + 1, nz), id(i, j + 1, nz)], "back");
        }
    }
    Mesh::new(Dim::Three, nodes, elements, lab.labels).expect("structured box is valid")
}

/// Quarter of a square plate `[0, half_width]^2` with a circular hole of
/// radius `radius` centred at the origin, meshed by a graded O-grid.
///
/// Labels: `hole`, `left` (x = 0), `bottom` (y = 0), `right`, `top`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateHole2d {
    pub radius: f64,
    pub half_width: f64,
    /// Divisions along the hole; must be even so that the plate corner is a node.
    pub n_theta: usize,
    pub n_radial: usize,
}

impl Default for PlateHole2d {
    fn default() -> Self {
        PlateHole2d { radius: 1.0, half_width: 5.0, n_theta: 32, n_radial: 32 }
    }
}

struct Quarter {
    nodes: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    edge_labels: Vec<([usize; 2], &'static str)>,
}

fn quarter_plate(p: &PlateHole2d) -> Result<Quarter, MeshError> {
    if p.n_theta < 2 || p.n_theta % 2 != 0 || p.n_radial < 1 {
        return Err(MeshError::Generator("plate-with-hole needs an even n_theta >= 2 and n_radial >= 1"));
    }
    if !(p.radius > 0.0 && p.half_width > p.radius) {
        return Err(MeshError::Generator("plate-with-hole needs 0 < radius < half_width"));
    }
    let (nt, nr) = (p.n_theta, p.n_radial);
    let id = |i: usize, j: usize| j * (nt + 1) + i;
    let mut nodes = Vec::new();
    for j in 0..=nr {
        // Geometric-like grading towards the hole.
        let s = math::powf(j as f64 / nr as f64, 1.5);
        for i in 0..=nt {
            let th = FRAC_PI_2 * i as f64 / nt as f64;
            let inner = [p.radius * math::cos(th), p.radius * math::sin(th)];
            let outer = if 2 * i <= nt {
                [p.half_width, p.half_width * math::tan(th).min(1.0)]
            } else {
                [p.half_width * math::tan(FRAC_PI_2 - th).min(1.0), p.half_width]
            };
            let mut x = [inner[0] + s * (outer[0] - inner[0]), inner[1] + s * (outer[1] - inner[1]), 0.0];
            if i == nt {
                x[0] = 0.0;
            }
            if i == 0 {
                x[1] = 0.0;
            }
            nodes.push(x);
        }
    }
    let mut triangles = Vec::new();
    for j in 0..nr {
        for i in 0..nt {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if (i + j) % 2 == 0 {
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            } else {
                triangles.push([a, b, d]);
                triangles.push([b, c, d]);
            }
        }
    }
    let mut edge_labels = Vec::new();
    for i in 0..nt {
        edge_labels.push(([id(i, 0), id(i + 1, 0)], "hole"));
        let name = if 2 * i < nt { "right" } else { "top" };
        edge_labels.push(([id(i, nr), id(i + 1, nr)], name));
    }
    for j in 0..nr {
        edge_labels.push(([id(0, j), id(0, j + 1)], "bottom"));
        edge_labels.push(([id(nt, j), id(nt, j + 1)], "left"));
    }
    Ok(Quarter { nodes, triangles, edge_labels })
}

pub fn plate_with_hole_2d(p: &PlateHole2d) -> Result<Mesh, MeshError> {
    let q = quarter_plate(p)?;
    let mut lab = Labeler::new();
    for (e, name) in &q.edge_labels {
        lab.add(e, name);
    }
    let elements = q.triangles.iter().map(|t| [t[0], t[1], t[2], 0]).collect();
    Mesh::new(Dim::Two, q.nodes, elements, lab.labels)
}

/// One-eighth of a thick plate with a hole: the quarter plate extruded over
/// `[0, thickness]` and split into tetrahedra prism by prism.
///
/// Labels as in 2D plus `back` (z = 0, the mid-plane) and `front` (z = thickness).
#[derive(Debug, Clone, PartialEq)]
pub struct PlateHole3d {
    pub plate: PlateHole2d,
    pub thickness: f64,
    pub n_layers: usize,
}

impl Default for PlateHole3d {
    fn default() -> Self {
        PlateHole3d {
            plate: PlateHole2d { radius: 1.0, half_width: 5.0, n_theta: 8, n_radial: 6 },
            thickness: 1.0,
            n_layers: 3,
        }
    }
}

pub fn plate_with_hole_3d(p: &PlateHole3d) -> Result<Mesh, MeshError> {
    if p.n_layers < 1 || p.thickness <= 0.0 {
        return Err(MeshError::Generator("extrusion needs at least one layer and positive thickness"));
    }
    let q = quarter_plate(&p.plate)?;
    let n2 = q.nodes.len();
    let nl = p.n_layers;
    let mut nodes = Vec::with_capacity(n2 * (nl + 1));
    for k in 0..=nl {
        let z = p.thickness * k as f64 / nl as f64;
        nodes.extend(q.nodes.iter().map(|x| [x[0], x[1], z]));
    }
    let up = |v: usize, k: usize| v + k * n2;
    let mut elements = Vec::new();
    let mut lab = Labeler::new();
    for k in 0..nl {
        for t in &q.triangles {
            // Sorting by global id makes every shared quad use the diagonal
            // from its lower bottom vertex to the upper top vertex.
            let mut v = *t;
            v.sort_unstable();
            let [a, b, c] = v.map(|x| up(x, k));
            let [a1, b1, c1] = v.map(|x| up(x, k + 1));
            elements.push([a, b, c, c1]);
            elements.push([a, b, b1, c1]);
            elements.push([a, a1, b1, c1]);
        }
        for (e, name) in &q.edge_labels {
            let (u, v) = if e[0] < e[1] { (e[0], e[1]) } else { (e[1], e[0]) };
            lab.add(&[up(u, k), up(v, k), up(v, k + 1)], name);
            lab.add(&[up(u, k), up(u, k + 1), up(v, k + 1)], name);
        }
    }
    for t in &q.triangles {
        lab.add(&t.map(|x| up(x, 0)), "back");
        lab.add(&t.map(|x| up(x, nl)), "front");
    }
    Mesh::new(Dim::Three, nodes, elements, lab.labels)
}

/// L-shaped domain `[-1, 1]^2 \ (0, 1] x [-1, 0)` on a structured grid with
/// `n` cells per unit length (6·n² triangles).
///
/// Labels: `bottom` (y = -1), `right` (x = 1), `top`, `left`, and `notch`
/// for the two re-entrant edges.
pub fn l_shape(n: usize) -> Result<Mesh, MeshError> {
    if n == 0 {
        return Err(MeshError::Generator("subdivision counts must be at least 1"));
    }
    let m = 2 * n;
    let h = 1.0 / n as f64;
    let inside = |i: usize, j: usize| !(i >= n && j < n);
    let mut index = alloc::vec![usize::MAX; (m + 1) * (m + 1)];
    let mut nodes = Vec::new();
    for j in 0..=m {
        for i in 0..=m {
            // A node is kept if any adjacent cell is inside.
            let keep = (i.saturating_sub(1)..=i.min(m - 1))
                .any(|ci| (j.saturating_sub(1)..=j.min(m - 1)).any(|cj| inside(ci, cj)));
            if keep {
                index[j * (m + 1) + i] = nodes.len();
                nodes.push([-1.0 + i as f64 * h, -1.0 + j as f64 * h, 0.0]);
            }
        }
    }
    let id = |i: usize, j: usize| index[j * (m + 1) + i];
    let mut elements = Vec::new();
    for j in 0..m {
        for i in 0..m {
            if !inside(i, j) {
                continue;
            }
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if (i + j) % 2 == 0 {
                elements.push([a, b, c, 0]);
                elements.push([a, c, d, 0]);
            } else {
                elements.push([a, b, d, 0]);
                elements.push([b, c, d, 0]);
            }
        }
    }
    let mut lab = Labeler::new();
    for i in 0..m {
        if i < n {
            lab.add(&[id(i, 0), id(i + 1, 0)], "bottom");
        } else {
            lab.add(&[id(i, n), id(i + 1, n)], "notch");
        }
        lab.add(&[id(i, m), id(i + 1, m)], "top");
    }
    for j in 0..m {
        lab.add(&[id(0, j), id(0, j + 1)], "left");
        if j < n {
            lab.add(&[id(n, j), id(n, j + 1)], "notch");
        } else {
            lab.add(&[id(m, j), id(m, j + 1)], "right");
        }
    }
    Mesh::new(Dim::Two, nodes, elements, lab.labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_topology;

    #[test]
    fn counts_of_structured_meshes() {
        let m = generate_structured(&Grid::rectangle([0.0, 0.0], [1.0, 1.0], 1, 1)).unwrap();
        assert_eq!((m.n_elements(), m.n_nodes()), (2, 4));
        let m = generate_structured(&Grid::rectangle([0.0, 0.0], [1.0, 1.0], 2, 2)).unwrap();
        assert_eq!((m.n_elements(), m.n_nodes()), (8, 9));
        let m = generate_structured(&Grid::cuboid([0.0; 3], [1.0; 3], [1, 1, 1])).unwrap();
        assert_eq!(m.n_elements(), 6);
        assert!((m.total_measure() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_subdivision_is_an_error() {
        assert!(generate_structured(&Grid::rectangle([0.0, 0.0], [1.0, 1.0], 0, 2)).is_err());
    }

    #[test]
    fn all_boundary_facets_of_generated_meshes_are_labeled() {
        let meshes = [
            generate_structured(&Grid::rectangle([0.0, 0.0], [2.0, 1.0], 3, 2)).unwrap(),
            generate_structured(&Grid::cuboid([0.0; 3], [1.0, 2.0, 3.0], [2, 3, 2])).unwrap(),
            plate_with_hole_2d(&PlateHole2d { n_theta: 8, n_radial: 4, ..Default::default() }).unwrap(),
            plate_with_hole_3d(&PlateHole3d::default()).unwrap(),
            l_shape(3).unwrap(),
        ];
        for m in &meshes {
            let t = build_topology(m).unwrap();
            for f in &t.facets {
                assert_eq!(f.is_boundary(), f.label.is_some(), "{:?}", f.nodes);
            }
        }
    }

    #[test]
    fn box_measure_and_l_shape_size() {
        let m = generate_structured(&Grid::cuboid([0.0; 3], [1.0, 2.0, 3.0], [2, 3, 2])).unwrap();
        assert!((m.total_measure() - 6.0).abs() < 1e-12);
        let l = l_shape(13).unwrap();
        assert_eq!(l.n_elements(), 1014);
        assert!((l.total_measure() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn plate_sizes() {
        let p = plate_with_hole_2d(&PlateHole2d::default()).unwrap();
        assert_eq!(p.n_elements(), 2048);
        let p3 = plate_with_hole_3d(&PlateHole3d::default()).unwrap();
        assert_eq!(p3.n_elements(), 96 * 3 * 3);
        let area = p.total_measure();
        // Polygonal hole: slightly more area than the exact quarter plate.
        let exact = 25.0 - core::f64::consts::PI / 4.0;
        assert!(area > exact && area < exact + 0.01);
    }
}
