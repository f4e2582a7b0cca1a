//! Quadrature on reference simplices.
//!
//! Rules are collapsed (Duffy) tensor products of Gauss-Legendre rules. They
//! are exact for polynomials of any requested degree, at the price of a few
//! more points than optimal symmetric rules.

use alloc::vec::Vec;
use core::f64::consts::PI;
use crate::math;

/// Gauss-Legendre rule with `n` points on `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for i in 0..n {
        // Newton on P_n starting from the Chebyshev-like guess.
        let mut z = math::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if math::abs(dz) < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        x.push(0.5 * (1.0 - z));
        w.push(1.0 / ((1.0 - z * z) * dp * dp));
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

/// Quadrature rule on the reference simplex of dimension 1, 2 or 3.
///
/// The reference simplex has vertices `0, e1, .., e_dim`. Points are padded
/// with zeros to three coordinates.
#[derive(Debug, Clone)]
pub struct SimplexRule {
    pub dim: usize,
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl SimplexRule {
    /// Rule exact for all polynomials of total degree `<= degree`.
    pub fn new(dim: usize, degree: usize) -> Self {
        assert!((1..=3).contains(&dim));
        // The collapsed map adds up to dim-1 extra powers of (1-u).
        let n = (degree + dim).div_ceil(2).max(1);
        let (gx, gw) = gauss_legendre_unit(n);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        match dim {
            1 => {
                for i in 0..n {
                    points.push([gx[i], 0.0, 0.0]);
                    weights.push(gw[i]);
                }
            }
            2 => {
                for i in 0..n {
                    for j in 0..n {
                        let (u, v) = (gx[i], gx[j]);
                        points.push([u, v * (1.0 - u), 0.0]);
                        weights.push(gw[i] * gw[j] * (1.0 - u));
                    }
                }
            }
            _ => {
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            let (u, v, w) = (gx[i], gx[j], gx[k]);
                            points.push([u, v * (1.0 - u), w * (1.0 - u) * (1.0 - v)]);
                            weights.push(gw[i] * gw[j] * gw[k] * (1.0 - u) * (1.0 - u) * (1.0 - v));
                        }
                    }
                }
            }
        }
        SimplexRule { dim, points, weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Barycentric coordinates of point `q` (length `dim + 1`, vertex 0 first).
    pub fn barycentric(&self, q: usize) -> [f64; 4] {
        let p = self.points[q];
        let mut l = [0.0; 4];
        let mut s = 0.0;
        for k in 0..self.dim {
            l[k + 1] = p[k];
            s += p[k];
        }
        l[0] = 1.0 - s;
        l
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    // Integral of x^a y^b z^c over the reference simplex: a! b! c! / (a+b+c+dim)!
    fn monomial_exact(dim: usize, e: [u32; 3]) -> f64 {
        factorial(e[0]) * factorial(e[1]) * factorial(e[2]) / factorial(e[0] + e[1] + e[2] + dim as u32)
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in 1..8 {
            let (x, w) = gauss_legendre_unit(n);
            for p in 0..(2 * n) {
                let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
                assert!((s - 1.0 / (p as f64 + 1.0)).abs() < 1e-14, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn simplex_rules_are_exact_up_to_degree() {
        for dim in 1..=3 {
            for degree in 0..=8 {
                let rule = SimplexRule::new(dim, degree);
                for a in 0..=degree as u32 {
                    for b in 0..=(degree as u32 - a) {
                        for c in 0..=(degree as u32 - a - b) {
                            let e = match dim {
                                1 => [a + b + c, 0, 0],
                                2 => [a, b + c, 0],
                                _ => [a, b, c],
                            };
                            let s: f64 = rule
                                .points
                                .iter()
                                .zip(&rule.weights)
                                .map(|(p, w)| w * p[0].powi(e[0] as i32) * p[1].powi(e[1] as i32) * p[2].powi(e[2] as i32))
                                .sum();
                            let exact = monomial_exact(dim, e);
                            assert!((s - exact).abs() < 1e-14 * exact.max(1.0), "dim={dim} deg={degree} e={e:?}");
                        }
                    }
                }
            }
        }
    }
}
