//! Linear algebra kernels: sparse symmetric storage, sparse LDLᵀ,
//! redundancy elimination for constraint rows and equality-constrained
//! quadratic programs.

mod constraints;
pub mod dense;
mod ldl;
mod ordering;
mod saddle;
mod sparse;

pub use constraints::{eliminate_redundant_rows, eliminate_redundant_rows_with, Reduced, REDUNDANCY_TOL};
pub use ldl::{solve_spd, Ldl};
pub use ordering::nested_dissection;
pub use saddle::{objective, solve_saddle, SaddleOptions, SaddleSolution};
pub use sparse::SparseSymmetric;

use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is not positive definite: pivot {pivot:e} at row {row}")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("zero pivot at row {0} during factorization")]
    ZeroPivot(usize),
    #[error("redundant row {row} of block {block} is inconsistent (rhs mismatch {mismatch:e})")]
    InfeasibleConstraints { block: String, row: usize, mismatch: f64 },
    #[error("KKT system is rank deficient in block {block} (constraint residual {residual:e})")]
    RankDeficient { block: String, residual: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(&'static str),
}

/// Sparse row: `(column, value)` pairs.
pub type SparseRow = Vec<(usize, f64)>;

/// Labeled set of linear equality constraints `rows · x = rhs`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConstraintBlock {
    pub label: String,
    pub rows: Vec<SparseRow>,
    pub rhs: Vec<f64>,
}

impl ConstraintBlock {
    pub fn new(label: &str) -> Self {
        ConstraintBlock { label: String::from(label), rows: Vec::new(), rhs: Vec::new() }
    }

    pub fn push(&mut self, row: SparseRow, rhs: f64) {
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `rows · x - rhs` for every row.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().zip(&self.rhs).map(|(r, b)| row_dot(r, x) - b).collect()
    }

    /// Largest absolute row residual.
    pub fn max_residual(&self, x: &[f64]) -> f64 {
        self.residual(x).iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub(crate) fn row_dot(row: &[(usize, f64)], x: &[f64]) -> f64 {
    row.iter().map(|&(j, v)| v * x[j]).sum()
}

pub(crate) fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
