//! Shared oracles and fixtures for the integration tests.
#![allow(dead_code)]

use equistress_core::linalg::{ConstraintBlock, SparseSymmetric};
use equistress_core::mesh::{Dim, Mesh};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn to_sparse(a: &DMatrix<f64>) -> SparseSymmetric {
    let rows: Vec<Vec<f64>> = (0..a.nrows()).map(|i| a.row(i).iter().copied().collect()).collect();
    SparseSymmetric::from_dense(&rows)
}

pub fn to_dense(a: &SparseSymmetric) -> DMatrix<f64> {
    let rows = a.to_dense();
    DMatrix::from_fn(a.n(), a.n(), |i, j| rows[i][j])
}

pub fn block_from(label: &str, b: &DMatrix<f64>, c: &DVector<f64>) -> ConstraintBlock {
    let mut blk = ConstraintBlock::new(label);
    for i in 0..b.nrows() {
        let row = (0..b.ncols()).filter(|&j| b[(i, j)] != 0.0).map(|j| (j, b[(i, j)])).collect();
        blk.push(row, c[i]);
    }
    blk
}

/// Dense matrix and rhs of the stacked blocks.
pub fn stack(blocks: &[&ConstraintBlock], n: usize) -> (DMatrix<f64>, DVector<f64>) {
    let m: usize = blocks.iter().map(|b| b.len()).sum();
    let mut cm = DMatrix::zeros(m, n);
    let mut c = DVector::zeros(m);
    let mut i = 0;
    for b in blocks {
        for (row, rhs) in b.rows.iter().zip(&b.rhs) {
            for &(j, v) in row {
                cm[(i, j)] += v;
            }
            c[i] = *rhs;
            i += 1;
        }
    }
    (cm, c)
}

/// Orthonormal basis of the null space of `cm`.
pub fn null_space(cm: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    if cm.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    let rows = cm.nrows().max(n);
    let mut padded = DMatrix::zeros(rows, n);
    padded.view_mut((0, 0), (cm.nrows(), n)).copy_from(cm);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.unwrap();
    let smax = svd.singular_values.max();
    let null: Vec<usize> = (0..n).filter(|&i| svd.singular_values[i] <= 1e-10 * smax).collect();
    let mut z = DMatrix::zeros(n, null.len());
    for (k, &i) in null.iter().enumerate() {
        z.set_column(k, &vt.row(i).transpose());
    }
    z
}

/// Minimizer of `½xᵀAx − xᵀb` subject to `Cx = c` by the null-space method.
pub fn null_space_qp(a: &DMatrix<f64>, b: &DVector<f64>, cm: &DMatrix<f64>, c: &DVector<f64>) -> DVector<f64> {
    let n = a.nrows();
    if cm.nrows() == 0 {
        return a.clone().cholesky().unwrap().solve(b);
    }
    let xp = cm.clone().svd(true, true).solve(c, 1e-12).unwrap();
    let z = null_space(cm, n);
    let rhs = z.transpose() * (b - a * &xp);
    let red = z.transpose() * a * &z;
    let y = red.cholesky().expect("reduced Hessian is definite").solve(&rhs);
    xp + z * y
}

/// Copy of `mesh` with interior nodes moved by up to `amp` times the local spacing.
pub fn jittered(mesh: &Mesh, amp: f64, rng: &mut ChaCha8Rng) -> Mesh {
    let d = mesh.dim().n();
    let nv = mesh.dim().nv();
    let lo: Vec<f64> = (0..d).map(|i| mesh.nodes().iter().map(|p| p[i]).fold(f64::INFINITY, f64::min)).collect();
    let hi: Vec<f64> = (0..d).map(|i| mesh.nodes().iter().map(|p| p[i]).fold(f64::NEG_INFINITY, f64::max)).collect();
    let h = (0..mesh.n_elements())
        .flat_map(|e| {
            let x = mesh.coords(e);
            (0..nv).flat_map(move |a| (a + 1..nv).map(move |b| ((0..3).map(|i| (x[a][i] - x[b][i]).powi(2)).sum::<f64>()).sqrt()))
        })
        .fold(f64::INFINITY, f64::min);
    let nodes = mesh
        .nodes()
        .iter()
        .map(|p| {
            let inside = (0..d).all(|i| p[i] > lo[i] + 1e-12 && p[i] < hi[i] - 1e-12);
            let mut q = *p;
            if inside {
                for c in q.iter_mut().take(d) {
                    *c += amp * h * rng.random_range(-1.0..1.0);
                }
            }
            q
        })
        .collect();
    let elements = (0..mesh.n_elements())
        .map(|e| {
            let mut el = [0usize; 4];
            el[..nv].copy_from_slice(mesh.element(e));
            el
        })
        .collect();
    Mesh::new(mesh.dim(), nodes, elements, mesh.boundary_labels().clone()).unwrap()
}

pub fn is_2d(mesh: &Mesh) -> bool {
    mesh.dim() == Dim::Two
}
