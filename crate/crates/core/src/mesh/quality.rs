use super::{Dim, Mesh, MeshError};
use crate::math::{self, Vec3};
use alloc::vec::Vec;

/// Per-element shape quality.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QualityMetrics {
    /// Inradius over circumradius: at most 1/2 for triangles, 1/3 for tetrahedra.
    pub radius_ratio: Vec<f64>,
    /// Shortest over longest edge (2D) or smallest over largest face area (3D).
    pub edge_or_area_ratio: Vec<f64>,
}

pub fn quality_metrics(mesh: &Mesh) -> Result<QualityMetrics, MeshError> {
    let dim = mesh.dim();
    let mut q = QualityMetrics::default();
    for e in 0..mesh.n_elements() {
        let x = mesh.coords(e);
        q.radius_ratio.push(radius_ratio(dim, &x).ok_or(MeshError::Degenerate(e))?);
        q.edge_or_area_ratio.push(edge_or_area_ratio(dim, &x).ok_or(MeshError::Degenerate(e))?);
    }
    Ok(q)
}

fn scale_of(dim: Dim, x: &[Vec3; 4]) -> f64 {
    let mut h: f64 = 0.0;
    for i in 0..dim.nv() {
        for j in i + 1..dim.nv() {
            h = h.max(math::dist(x[i], x[j]));
        }
    }
    h
}

fn face_area(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    0.5 * math::norm(math::cross(math::sub(b, a), math::sub(c, a)))
}

/// Inscribed over circumscribed radius, or `None` for a degenerate simplex.
pub fn radius_ratio(dim: Dim, x: &[Vec3; 4]) -> Option<f64> {
    let h = scale_of(dim, x);
    match dim {
        Dim::Two => {
            let a = math::dist(x[1], x[2]);
            let b = math::dist(x[0], x[2]);
            let c = math::dist(x[0], x[1]);
            let area = face_area(x[0], x[1], x[2]);
            if area <= 1e-14 * h * h {
                return None;
            }
            let r_in = 2.0 * area / (a + b + c);
            let r_circ = a * b * c / (4.0 * area);
            Some(r_in / r_circ)
        }
        Dim::Three => {
            let e1 = math::sub(x[1], x[0]);
            let e2 = math::sub(x[2], x[0]);
            let e3 = math::sub(x[3], x[0]);
            let vol = math::abs(math::dot(e1, math::cross(e2, e3))) / 6.0;
            if vol <= 1e-14 * h * h * h {
                return None;
            }
            let faces = face_area(x[1], x[2], x[3])
                + face_area(x[0], x[2], x[3])
                + face_area(x[0], x[1], x[3])
                + face_area(x[0], x[1], x[2]);
            let r_in = 3.0 * vol / faces;
            // Circumcenter c solves 2 e_k . c = |e_k|^2 relative to x0.
            let m = [e1, e2, e3];
            let (inv, _) = math::inverse(&m, 3);
            let rhs = [math::dot(e1, e1) / 2.0, math::dot(e2, e2) / 2.0, math::dot(e3, e3) / 2.0];
            let c = [0, 1, 2].map(|i| math::dot(inv[i], rhs));
            Some(r_in / math::norm(c))
        }
    }
}

/// Shortest/longest edge (2D) or smallest/largest face area (3D).
pub fn edge_or_area_ratio(dim: Dim, x: &[Vec3; 4]) -> Option<f64> {
    let h = scale_of(dim, x);
    let vals: Vec<f64> = match dim {
        Dim::Two => {
            if face_area(x[0], x[1], x[2]) <= 1e-14 * h * h {
                return None;
            }
            alloc::vec![math::dist(x[0], x[1]), math::dist(x[1], x[2]), math::dist(x[0], x[2])]
        }
        Dim::Three => {
            let e1 = math::sub(x[1], x[0]);
            let vol = math::abs(math::dot(e1, math::cross(math::sub(x[2], x[0]), math::sub(x[3], x[0])))) / 6.0;
            if vol <= 1e-14 * h * h * h {
                return None;
            }
            alloc::vec![
                face_area(x[1], x[2], x[3]),
                face_area(x[0], x[2], x[3]),
                face_area(x[0], x[1], x[3]),
                face_area(x[0], x[1], x[2]),
            ]
        }
    };
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().cloned().fold(0.0, f64::max);
    Some(lo / hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri(p: [[f64; 2]; 3]) -> [Vec3; 4] {
        let mut x = [[0.0; 3]; 4];
        for i in 0..3 {
            x[i] = [p[i][0], p[i][1], 0.0];
        }
        x
    }

    fn regular_tet() -> [Vec3; 4] {
        [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]
    }

    #[test]
    fn equilateral_triangle_is_optimal() {
        let x = tri([[0.0, 0.0], [1.0, 0.0], [0.5, 3f64.sqrt() / 2.0]]);
        assert!((radius_ratio(Dim::Two, &x).unwrap() - 0.5).abs() < 1e-14);
        assert!((edge_or_area_ratio(Dim::Two, &x).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn right_triangle_closed_form() {
        let x = tri([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let c = 2f64.sqrt();
        let expected = ((1.0 + 1.0 - c) / 2.0) / (c / 2.0);
        assert!((radius_ratio(Dim::Two, &x).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 0.41421).abs() < 1e-5);
    }

    #[test]
    fn three_four_five_edge_ratio() {
        let x = tri([[0.0, 0.0], [3.0, 0.0], [0.0, 4.0]]);
        assert!((edge_or_area_ratio(Dim::Two, &x).unwrap() - 0.6).abs() < 1e-14);
    }

    #[test]
    fn regular_tetrahedron_is_optimal() {
        let x = regular_tet();
        assert!((radius_ratio(Dim::Three, &x).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        assert!((edge_or_area_ratio(Dim::Three, &x).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_inputs_are_reported() {
        let x = tri([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]);
        assert!(radius_ratio(Dim::Two, &x).is_none());
        assert!(edge_or_area_ratio(Dim::Two, &x).is_none());
        let mut t = regular_tet();
        t[3] = [0.0, 0.0, -1.0];
        t[0] = [0.0, 0.0, 1.0];
        t[1] = [0.0, 0.0, 0.0];
        assert!(radius_ratio(Dim::Three, &t).is_none());
    }
}
