use super::{norm_inf, row_dot, ConstraintBlock, Ldl, LinalgError, SparseSymmetric};
use alloc::vec;
use alloc::vec::Vec;

/// Tuning knobs of [`solve_saddle`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleOptions {
    /// Regularization of the multiplier block of the scaled system.
    pub dual_regularization: f64,
    /// Relative constraint residual accepted after refinement.
    pub constraint_tol: f64,
    pub max_refinement: usize,
}

impl Default for SaddleOptions {
    fn default() -> Self {
        SaddleOptions { dual_regularization: 1e-8, constraint_tol: 1e-10, max_refinement: 50 }
    }
}

/// Minimizer of `½ xᵀAx − xᵀb` under the equality constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleSolution {
    pub x: Vec<f64>,
    /// One multiplier vector per constraint block, in block order.
    pub multipliers: Vec<Vec<f64>>,
    /// Ridge added to `A` when the plain factorization failed.
    pub ridge: Option<f64>,
    pub refinement_steps: usize,
    /// Relative constraint residual of each block.
    pub constraint_residuals: Vec<f64>,
}

/// Solves the KKT system `[A Bᵀ; B 0] (x, y) = (b, c)`.
///
/// The system is Jacobi-scaled, the multiplier block is regularized by a
/// small negative diagonal so that the matrix becomes quasi-definite, and the
/// regularized factorization is used as a preconditioner for iterative
/// refinement on the exact system. If the primal pivots are not positive a
/// ridge `1e-12·trace(A)/n` is added and reported in the solution. Constraint
/// blocks are expected to be of full row rank; if the final constraint
/// residual exceeds the tolerance the worst block is reported as rank
/// deficient.
pub fn solve_saddle(
    a: &SparseSymmetric,
    b: &[f64],
    blocks: &[ConstraintBlock],
    opts: &SaddleOptions,
) -> Result<SaddleSolution, LinalgError> {
    let n = a.n();
    if b.len() != n {
        return Err(LinalgError::Dimension("linear term length"));
    }
    let diag = a.diagonal();
    let mean_diag = {
        let pos: Vec<f64> = diag.iter().copied().filter(|d| *d > 0.0).collect();
        if pos.is_empty() {
            1.0
        } else {
            pos.iter().sum::<f64>() / pos.len() as f64
        }
    };
    let dp: Vec<f64> = diag.iter().map(|&d| 1.0 / crate::math::sqrt(if d > 1e-300 { d } else { mean_diag })).collect();

    // Scaled constraint rows with unit max-norm.
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut rhs = Vec::new();
    let mut row_scale = Vec::new();
    let mut owner = Vec::new();
    for (k, blk) in blocks.iter().enumerate() {
        if blk.rows.len() != blk.rhs.len() {
            return Err(LinalgError::Dimension("constraint rows and rhs differ in length"));
        }
        for (r, &c) in blk.rows.iter().zip(&blk.rhs) {
            if r.iter().any(|&(j, _)| j >= n) {
                return Err(LinalgError::Dimension("constraint column out of range"));
            }
            let scaled: Vec<(usize, f64)> = r.iter().map(|&(j, v)| (j, v * dp[j])).collect();
            let s = scaled.iter().fold(0.0f64, |m, e| m.max(e.1.abs()));
            if s == 0.0 {
                return Err(LinalgError::RankDeficient { block: blk.label.clone(), residual: c.abs() });
            }
            rows.push(scaled.into_iter().map(|(j, v)| (j, v / s)).collect());
            rhs.push(c / s);
            row_scale.push(1.0 / s);
            owner.push(k);
        }
    }
    let m = rows.len();
    let a_s = a.scaled(&dp);
    let bs: Vec<f64> = b.iter().zip(&dp).map(|(v, d)| v * d).collect();

    let build = |ridge: f64| {
        let mut k = SparseSymmetric::new(n + m);
        for (r, c, v) in a_s.entries() {
            k.add(r, c, v);
        }
        if ridge > 0.0 {
            for i in 0..n {
                k.add(i, i, ridge);
            }
        }
        for (i, row) in rows.iter().enumerate() {
            for &(j, v) in row {
                k.add(n + i, j, v);
            }
            k.add(n + i, n + i, -opts.dual_regularization);
        }
        k.finalize();
        k
    };
    let inertia_ok = |f: &Ldl| f.pivots().all(|(i, d)| if i < n { d > 0.0 } else { d < 0.0 });

    let mut ridge = None;
    let factor = match Ldl::factor(&build(0.0)) {
        Ok(f) if inertia_ok(&f) => f,
        _ => {
            let r = 1e-12 * a_s.trace().max(f64::MIN_POSITIVE) / n.max(1) as f64;
            log::warn!("saddle solve: adding ridge {r:e} to the scaled Hessian");
            ridge = Some(r);
            Ldl::factor(&build(r))?
        }
    };

    // Iterative refinement on the unregularized KKT system.
    let kkt_mul = |x: &[f64], y: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let mut top = a_s.mul_vec(x);
        let mut bottom = vec![0.0; m];
        for (i, row) in rows.iter().enumerate() {
            for &(j, v) in row {
                top[j] += v * y[i];
            }
            bottom[i] = row_dot(row, x);
        }
        (top, bottom)
    };
    let mut sol = vec![0.0; n + m];
    let scale = norm_inf(&bs).max(norm_inf(&rhs)).max(f64::MIN_POSITIVE);
    let mut steps = 0;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for it in 0..=opts.max_refinement {
        let (top, bottom) = kkt_mul(&sol[..n], &sol[n..]);
        let mut r: Vec<f64> = bs.iter().zip(&top).map(|(b, t)| b - t).collect();
        r.extend(rhs.iter().zip(&bottom).map(|(c, t)| c - t));
        let res = norm_inf(&r);
        if best.as_ref().is_none_or(|b| res < b.0) {
            best = Some((res, sol.clone()));
        }
        if res <= 1e-15 * scale || it == opts.max_refinement {
            break;
        }
        let d = factor.solve(&r);
        for (s, di) in sol.iter_mut().zip(&d) {
            *s += di;
        }
        steps = it + 1;
    }
    let sol = best.map(|b| b.1).unwrap_or(sol);

    let x: Vec<f64> = sol[..n].iter().zip(&dp).map(|(v, d)| v * d).collect();
    let mut multipliers: Vec<Vec<f64>> = blocks.iter().map(|blk| Vec::with_capacity(blk.len())).collect();
    for i in 0..m {
        multipliers[owner[i]].push(sol[n + i] * row_scale[i]);
    }
    // Residuals are measured both on the caller's rows and on the
    // normalized rows, so that badly scaled rows cannot hide behind `1 +`.
    let mut constraint_residuals: Vec<f64> =
        blocks.iter().map(|blk| blk.max_residual(&x) / (1.0 + norm_inf(&blk.rhs))).collect();
    for i in 0..m {
        let r = (row_dot(&rows[i], &sol[..n]) - rhs[i]).abs() / (1.0 + rhs[i].abs());
        constraint_residuals[owner[i]] = constraint_residuals[owner[i]].max(r);
    }
    if let Some((k, &worst)) = constraint_residuals.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)) {
        if worst > opts.constraint_tol {
            return Err(LinalgError::RankDeficient { block: blocks[k].label.clone(), residual: worst });
        }
    }
    Ok(SaddleSolution { x, multipliers, ridge, refinement_steps: steps, constraint_residuals })
}

/// Objective `½ xᵀAx − xᵀb`.
pub fn objective(a: &SparseSymmetric, b: &[f64], x: &[f64]) -> f64 {
    0.5 * a.bilinear(x, x) - x.iter().zip(b).map(|(x, b)| x * b).sum::<f64>()
}
