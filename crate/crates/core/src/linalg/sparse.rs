use alloc::vec;
use alloc::vec::Vec;

/// Symmetric sparse matrix storing only the lower triangle.
///
/// Entries are accumulated as triplets (duplicates are summed) and compressed
/// into column-major form by [`SparseSymmetric::finalize`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseSymmetric {
    n: usize,
    triplets: Vec<(usize, usize, f64)>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
    finalized: bool,
}

impl SparseSymmetric {
    pub fn new(n: usize) -> Self {
        SparseSymmetric { n, col_ptr: vec![0; n + 1], finalized: true, ..Default::default() }
    }

    pub fn identity(n: usize) -> Self {
        let mut a = SparseSymmetric::new(n);
        for i in 0..n {
            a.add(i, i, 1.0);
        }
        a.finalize();
        a
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let mut a = SparseSymmetric::new(d.len());
        for (i, &v) in d.iter().enumerate() {
            a.add(i, i, v);
        }
        a.finalize();
        a
    }

    /// Lower triangle of a dense symmetric matrix given row by row.
    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let mut a = SparseSymmetric::new(rows.len());
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate().take(i + 1) {
                if v != 0.0 {
                    a.add(i, j, v);
                }
            }
        }
        a.finalize();
        a
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Adds `v` at `(i, j)` and, implicitly, at `(j, i)`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        if self.finalized {
            self.reopen();
        }
        self.triplets.push((r, c, v));
    }

    fn reopen(&mut self) {
        for c in 0..self.n {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                self.triplets.push((self.row_idx[k], c, self.values[k]));
            }
        }
        self.col_ptr.clear();
        self.row_idx.clear();
        self.values.clear();
        self.finalized = false;
    }

    /// Compresses pending triplets, summing duplicates.
    pub fn finalize(&mut self) {
        if self.finalized {
            return;
        }
        let mut t = core::mem::take(&mut self.triplets);
        t.sort_unstable_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));
        let mut col_ptr = vec![0usize; self.n + 1];
        let mut row_idx = Vec::with_capacity(t.len());
        let mut values: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in t {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                row_idx.push(r);
                values.push(v);
                col_ptr[c + 1] += 1;
                last = Some((r, c));
            }
        }
        for c in 0..self.n {
            col_ptr[c + 1] += col_ptr[c];
        }
        self.col_ptr = col_ptr;
        self.row_idx = row_idx;
        self.values = values;
        self.finalized = true;
    }

    fn assert_finalized(&self) {
        assert!(self.finalized, "SparseSymmetric used before finalize()");
    }

    /// Stored lower-triangle entries `(row, col, value)` with `row >= col`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.assert_finalized();
        (0..self.n).flat_map(move |c| {
            (self.col_ptr[c]..self.col_ptr[c + 1]).map(move |k| (self.row_idx[k], c, self.values[k]))
        })
    }

    pub fn nnz(&self) -> usize {
        self.assert_finalized();
        self.values.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.assert_finalized();
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let range = self.col_ptr[c]..self.col_ptr[c + 1];
        match self.row_idx[range.clone()].binary_search(&r) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (r, c, v) in self.entries() {
            y[r] += v * x[c];
            if r != c {
                y[c] += v * x[r];
            }
        }
        y
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        self.mul_vec(y).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Symmetric scaling `D A D` with `D = diag(d)`.
    pub fn scaled(&self, d: &[f64]) -> SparseSymmetric {
        let mut a = self.clone();
        for c in 0..self.n {
            for k in a.col_ptr[c]..a.col_ptr[c + 1] {
                a.values[k] *= d[a.row_idx[k]] * d[c];
            }
        }
        a
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.n]; self.n];
        for (r, c, v) in self.entries() {
            m[r][c] = v;
            m[c][r] = v;
        }
        m
    }

    /// Adjacency lists of the sparsity graph (diagonal excluded).
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for (r, c, _) in self.entries() {
            if r != c {
                adj[r].push(c);
                adj[c].push(r);
            }
        }
        adj
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed_and_symmetry_holds() {
        let mut a = SparseSymmetric::new(3);
        a.add(0, 0, 1.0);
        a.add(1, 0, 2.0);
        a.add(0, 1, 3.0);
        a.add(2, 2, 4.0);
        a.finalize();
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(0, 1), 5.0);
        assert_eq!(a.get(1, 0), 5.0);
        assert_eq!(a.mul_vec(&[1.0, 1.0, 1.0]), vec![6.0, 5.0, 4.0]);
        a.add(2, 2, 1.0);
        a.finalize();
        assert_eq!(a.get(2, 2), 5.0);
        assert_eq!(a.nnz(), 3);
    }
}
