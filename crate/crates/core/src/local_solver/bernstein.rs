//! Bernstein polynomials on a simplex and their exact integrals.
//!
//! A degree-`n` Bernstein polynomial on a `d`-simplex is
//! `B_α = n!/α! · Π λ_i^{α_i}` with `|α| = n`. Products of barycentric
//! monomials integrate in closed form, `∫_E λ^α = |E| d! α! / (|α| + d)!`,
//! so element matrices need no quadrature.

use alloc::vec::Vec;

pub(crate) type MultiIndex = [usize; 4];

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |f, k| f * k as f64)
}

fn multi_factorial(a: &MultiIndex) -> f64 {
    a.iter().map(|&k| factorial(k)).product()
}

/// Multi-indices of degree `n` over `nv` barycentric coordinates, in a fixed order.
pub(crate) fn multi_indices(nv: usize, n: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut cur = [0usize; 4];
    fill(nv, 0, n, &mut cur, &mut out);
    out
}

fn fill(nv: usize, slot: usize, left: usize, cur: &mut MultiIndex, out: &mut Vec<MultiIndex>) {
    if slot == nv - 1 {
        cur[slot] = left;
        out.push(*cur);
        return;
    }
    for k in (0..=left).rev() {
        cur[slot] = k;
        fill(nv, slot + 1, left - k, cur, out);
    }
    cur[slot] = 0;
}

/// Tables for one polynomial degree on one simplex dimension.
#[derive(Debug, Clone)]
pub(crate) struct Bernstein {
    pub nv: usize,
    pub degree: usize,
    pub indices: Vec<MultiIndex>,
    /// Indices of degree `degree - 1`.
    pub lower: Vec<MultiIndex>,
    /// `down[a][i]`: position of `α - e_i` in `lower`, if `α_i > 0`.
    pub down: Vec<[Option<usize>; 4]>,
    /// Gram matrix `∫ B_β B_γ / |E|` of the degree `degree - 1` family.
    pub lower_gram: Vec<f64>,
}

impl Bernstein {
    pub fn new(dim: usize, degree: usize) -> Self {
        assert!(degree >= 1);
        let nv = dim + 1;
        let indices = multi_indices(nv, degree);
        let lower = multi_indices(nv, degree - 1);
        let down = indices
            .iter()
            .map(|a| {
                core::array::from_fn(|i| {
                    if i < nv && a[i] > 0 {
                        let mut b = *a;
                        b[i] -= 1;
                        lower.iter().position(|x| *x == b)
                    } else {
                        None
                    }
                })
            })
            .collect();
        let n = lower.len();
        let mut lower_gram = alloc::vec![0.0; n * n];
        for (i, b) in lower.iter().enumerate() {
            for (j, c) in lower.iter().enumerate() {
                lower_gram[i * n + j] = product_integral(dim, b, c);
            }
        }
        Bernstein { nv, degree, indices, lower, down, lower_gram }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    /// `∫_E B_α / |E|`, identical for every `α`.
    pub fn mean(&self) -> f64 {
        let d = self.nv - 1;
        factorial(d) * factorial(self.degree) / factorial(self.degree + d)
    }

    /// `∫_E λ_v B_α / |E|`.
    pub fn linear_moment(&self, a: usize, v: usize) -> f64 {
        let d = self.nv - 1;
        let n = self.degree;
        factorial(d) * factorial(n) * (self.indices[a][v] + 1) as f64 / factorial(n + 1 + d)
    }

    /// `∫_F λ_v B_α / |F|` over the facet opposite local vertex `k` (zero if `α_k > 0`).
    pub fn facet_linear_moment(&self, a: usize, k: usize, v: usize) -> f64 {
        let al = &self.indices[a];
        if al[k] > 0 || v == k {
            return 0.0;
        }
        let d = self.nv - 1;
        let n = self.degree;
        factorial(d - 1) * factorial(n) * (al[v] + 1) as f64 / factorial(n + d)
    }
}

/// Bernstein values `n!/α! Π l_i^{α_i}` for each multi-index in `idx`.
pub(crate) fn values(nv: usize, idx: &[MultiIndex], l: &[f64; 4]) -> Vec<f64> {
    idx.iter()
        .map(|a| {
            let n: usize = a.iter().sum();
            let mut v = factorial(n) / multi_factorial(a);
            for i in 0..nv {
                for _ in 0..a[i] {
                    v *= l[i];
                }
            }
            v
        })
        .collect()
}

/// `∫_E B_β B_γ / |E|` for Bernstein polynomials of possibly different degrees.
fn product_integral(dim: usize, b: &MultiIndex, c: &MultiIndex) -> f64 {
    let nb: usize = b.iter().sum();
    let nc: usize = c.iter().sum();
    let mut s = [0usize; 4];
    for i in 0..4 {
        s[i] = b[i] + c[i];
    }
    factorial(nb) * factorial(nc) / (multi_factorial(b) * multi_factorial(c)) * factorial(dim) * multi_factorial(&s)
        / factorial(nb + nc + dim)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_polynomial_dimensions() {
        assert_eq!(multi_indices(3, 4).len(), 15);
        assert_eq!(multi_indices(4, 4).len(), 35);
        assert_eq!(multi_indices(4, 0).len(), 1);
    }

    #[test]
    fn partition_of_unity() {
        let b = Bernstein::new(3, 4);
        let s: f64 = values(4, &b.indices, &[0.1, 0.2, 0.3, 0.4]).iter().sum();
        assert!((s - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gram_rows_sum_to_mean() {
        // Σ_γ ∫ B_β B_γ = ∫ B_β by partition of unity.
        for dim in [2, 3] {
            let b = Bernstein::new(dim, 4);
            let n = b.lower.len();
            let lower_mean = factorial(dim) * factorial(3) / factorial(3 + dim);
            for i in 0..n {
                let s: f64 = b.lower_gram[i * n..(i + 1) * n].iter().sum();
                assert!((s - lower_mean).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn moments_are_consistent() {
        let b = Bernstein::new(2, 3);
        // Σ_v λ_v = 1
        for a in 0..b.len() {
            let s: f64 = (0..3).map(|v| b.linear_moment(a, v)).sum();
            assert!((s - b.mean()).abs() < 1e-15);
        }
    }
}
