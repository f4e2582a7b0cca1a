use super::{nested_dissection, norm_inf, LinalgError, SparseSymmetric};
use alloc::vec;
use alloc::vec::Vec;

const NONE: usize = usize::MAX;

/// Sparse `LDLᵀ` factorization with a nested-dissection ordering.
///
/// No pivoting is performed, so the factorization exists for definite and
/// quasi-definite matrices. The pivots `D` are exposed so callers can check
/// the inertia they expect.
#[derive(Debug, Clone)]
pub struct Ldl {
    n: usize,
    /// `perm[new] = old`.
    perm: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
    d: Vec<f64>,
    /// Diagonal of the permuted input, for relative pivot checks.
    a_diag: Vec<f64>,
}

impl Ldl {
    pub fn factor(a: &SparseSymmetric) -> Result<Self, LinalgError> {
        let perm = nested_dissection(&a.adjacency());
        Self::factor_with(a, perm)
    }

    /// Factorization with an explicit ordering `perm[new] = old`.
    pub fn factor_with(a: &SparseSymmetric, perm: Vec<usize>) -> Result<Self, LinalgError> {
        let n = a.n();
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        // Upper triangle of P A Pᵀ, column-major.
        let mut counts = vec![0usize; n + 1];
        for (r, c, _) in a.entries() {
            counts[inv[r].max(inv[c]) + 1] += 1;
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let ap = counts.clone();
        let mut next = counts;
        let mut ai = vec![0; ap[n]];
        let mut ax = vec![0.0; ap[n]];
        let mut a_diag = vec![0.0; n];
        for (r, c, v) in a.entries() {
            let (pr, pc) = (inv[r], inv[c]);
            let (row, col) = if pr <= pc { (pr, pc) } else { (pc, pr) };
            ai[next[col]] = row;
            ax[next[col]] = v;
            next[col] += 1;
            if row == col {
                a_diag[row] = v;
            }
        }

        // Elimination tree and column counts.
        let mut etree = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        let mut work = vec![NONE; n];
        for j in 0..n {
            work[j] = j;
            for &i0 in &ai[ap[j]..ap[j + 1]] {
                let mut i = i0;
                while i < j && work[i] != j {
                    if etree[i] == NONE {
                        etree[i] = j;
                    }
                    lnz[i] += 1;
                    work[i] = j;
                    i = etree[i];
                    if i == NONE {
                        break;
                    }
                }
            }
        }
        let mut lp = vec![0usize; n + 1];
        for i in 0..n {
            lp[i + 1] = lp[i] + lnz[i];
        }
        let mut li = vec![0usize; lp[n]];
        let mut lx = vec![0.0; lp[n]];
        let mut d = vec![0.0; n];
        let mut dinv = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut marked = vec![false; n];
        let mut pattern = Vec::with_capacity(n);
        let mut stack = Vec::with_capacity(n);
        let mut fill = lp.clone();

        for k in 0..n {
            pattern.clear();
            d[k] = 0.0;
            for p in ap[k]..ap[k + 1] {
                let i = ai[p];
                if i == k {
                    d[k] += ax[p];
                    continue;
                }
                y[i] += ax[p];
                let mut j = i;
                if marked[j] {
                    continue;
                }
                stack.clear();
                while j != NONE && j < k && !marked[j] {
                    marked[j] = true;
                    stack.push(j);
                    j = etree[j];
                }
                while let Some(s) = stack.pop() {
                    pattern.push(s);
                }
            }
            // Columns of L are used in reverse topological order.
            for &c in pattern.iter().rev() {
                let yc = y[c];
                for q in lp[c]..fill[c] {
                    y[li[q]] -= lx[q] * yc;
                }
                let l = yc * dinv[c];
                li[fill[c]] = k;
                lx[fill[c]] = l;
                fill[c] += 1;
                d[k] -= yc * l;
                y[c] = 0.0;
                marked[c] = false;
            }
            if d[k] == 0.0 || !d[k].is_finite() {
                return Err(LinalgError::ZeroPivot(perm[k]));
            }
            dinv[k] = 1.0 / d[k];
        }
        Ok(Ldl { n, perm, lp, li, lx, d, a_diag })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Pivots `D` in factorization order, paired with the original row index.
    pub fn pivots(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.perm.iter().copied().zip(self.d.iter().copied())
    }

    /// Smallest ratio `D_k / A_kk` over pivots; negative when not definite.
    pub fn min_relative_pivot(&self) -> (usize, f64) {
        let mut worst = (0, f64::INFINITY);
        for k in 0..self.n {
            let scale = self.a_diag[k].abs().max(f64::MIN_POSITIVE);
            let r = self.d[k] / scale;
            if r < worst.1 {
                worst = (self.perm[k], r);
            }
        }
        worst
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&o| b[o]).collect();
        for i in 0..n {
            let xi = x[i];
            for q in self.lp[i]..self.lp[i + 1] {
                x[self.li[q]] -= self.lx[q] * xi;
            }
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for q in self.lp[i]..self.lp[i + 1] {
                s -= self.lx[q] * x[self.li[q]];
            }
            x[i] = s;
        }
        let mut out = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            out[old] = x[new];
        }
        out
    }

    pub fn nnz_l(&self) -> usize {
        self.lx.len()
    }
}

/// Relative pivot below which a symmetric positive semidefinite matrix is
/// declared singular.
pub(crate) const SPD_PIVOT_TOL: f64 = 1e-12;

/// Solves `A x = b` for symmetric positive definite `A`.
///
/// Fails with [`LinalgError::NotPositiveDefinite`] if a pivot is not
/// positive relative to the matching diagonal entry (this is how rigid
/// modes of an under-constrained stiffness matrix show up).
pub fn solve_spd(a: &SparseSymmetric, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if b.len() != a.n() {
        return Err(LinalgError::Dimension("right-hand side length"));
    }
    let f = Ldl::factor(a).map_err(|e| match e {
        LinalgError::ZeroPivot(row) => LinalgError::NotPositiveDefinite { row, pivot: 0.0 },
        e => e,
    })?;
    let (row, rel) = f.min_relative_pivot();
    if rel <= SPD_PIVOT_TOL {
        let pivot = f.pivots().find(|p| p.0 == row).map(|p| p.1).unwrap_or(0.0);
        return Err(LinalgError::NotPositiveDefinite { row, pivot });
    }
    let mut x = f.solve(b);
    let scale = norm_inf(b);
    for _ in 0..3 {
        let ax = a.mul_vec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        if norm_inf(&r) <= 1e-15 * scale {
            break;
        }
        let dx = f.solve(&r);
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += di;
        }
    }
    Ok(x)
}
