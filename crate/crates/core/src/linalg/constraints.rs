use super::{ConstraintBlock, LinalgError};
use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::vec::Vec;
use core::cmp::Reverse;

/// Default relative pivot tolerance for redundancy detection.
pub const REDUNDANCY_TOL: f64 = 1e-10;

const PIVOT_THRESHOLD: f64 = 0.1;

/// Result of [`eliminate_redundant_rows`].
#[derive(Debug, Clone, PartialEq)]
pub struct Reduced {
    /// The independent rows, unchanged and in their original order.
    pub block: ConstraintBlock,
    /// Indices of the kept rows in the input block.
    pub kept: Vec<usize>,
    /// Largest rhs mismatch among discarded rows (relative to the rhs scale).
    pub max_discarded_mismatch: f64,
}

struct PivotRow {
    col: usize,
    row: BTreeMap<usize, f64>,
    rhs: f64,
}

/// Discards rows that are linear combinations of earlier rows.
///
/// Rows are scaled to unit max-norm and reduced by sparse Gaussian elimination
/// against the pivots found so far. A row whose reduced remainder stays below
/// `tol` (relative to the largest pivot) is redundant; its reduced right-hand
/// side must then vanish to `tol` relative to the magnitudes that entered it,
/// otherwise the constraints are inconsistent and an error is returned.
pub fn eliminate_redundant_rows(block: &ConstraintBlock, tol: f64) -> Result<Reduced, LinalgError> {
    eliminate_redundant_rows_with(block, tol, tol)
}

/// [`eliminate_redundant_rows`] with a separate tolerance for the
/// right-hand-side consistency of discarded rows, for data that is itself
/// only accurate to `consistency_tol`.
pub fn eliminate_redundant_rows_with(
    block: &ConstraintBlock,
    tol: f64,
    consistency_tol: f64,
) -> Result<Reduced, LinalgError> {
    if block.rows.len() != block.rhs.len() {
        return Err(LinalgError::Dimension("constraint rows and rhs differ in length"));
    }
    let mut pivots: Vec<PivotRow> = Vec::new();
    let mut pivot_of_col: BTreeMap<usize, usize> = BTreeMap::new();
    let mut largest_pivot: f64 = 0.0;
    let mut kept = Vec::new();
    let mut max_mismatch: f64 = 0.0;
    let mut remaining: BTreeMap<usize, usize> = BTreeMap::new();
    for row in &block.rows {
        for &(c, _) in row {
            *remaining.entry(c).or_insert(0) += 1;
        }
    }
    for (idx, (row, &rhs)) in block.rows.iter().zip(&block.rhs).enumerate() {
        for &(c, _) in row {
            if let Some(n) = remaining.get_mut(&c) {
                *n = n.saturating_sub(1);
            }
        }
        let mut work: BTreeMap<usize, f64> = BTreeMap::new();
        for &(c, v) in row {
            *work.entry(c).or_insert(0.0) += v;
        }
        let scale = work.values().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            if rhs.abs() > consistency_tol * rhs.abs().max(1.0) {
                return Err(LinalgError::InfeasibleConstraints {
                    block: block.label.clone(),
                    row: idx,
                    mismatch: rhs.abs(),
                });
            }
            continue;
        }
        for v in work.values_mut() {
            *v /= scale;
        }
        let mut b = rhs / scale;
        let mut rhs_mag = b.abs();
        let mut heap: BinaryHeap<Reverse<usize>> = work.keys().filter_map(|c| pivot_of_col.get(c)).map(|&p| Reverse(p)).collect();
        let mut last = None;
        while let Some(Reverse(p)) = heap.pop() {
            if last == Some(p) {
                continue;
            }
            last = Some(p);
            let piv = &pivots[p];
            let Some(&v) = work.get(&piv.col) else { continue };
            let factor = v / piv.row[&piv.col];
            for (&c, &pv) in &piv.row {
                let e = work.entry(c).or_insert(0.0);
                *e -= factor * pv;
                if c != piv.col {
                    if let Some(&q) = pivot_of_col.get(&c) {
                        if q > p {
                            heap.push(Reverse(q));
                        }
                    }
                }
            }
            work.remove(&piv.col);
            b -= factor * piv.rhs;
            rhs_mag += (factor * piv.rhs).abs();
        }
        let max = work.values().fold(0.0f64, |m, v| m.max(v.abs()));
        if max <= tol * largest_pivot.max(1.0) {
            let rel = b.abs() / rhs_mag.max(1.0);
            if b.abs() > consistency_tol * rhs_mag.max(1.0) {
                return Err(LinalgError::InfeasibleConstraints { block: block.label.clone(), row: idx, mismatch: b.abs() });
            }
            max_mismatch = max_mismatch.max(rel);
            continue;
        }
        work.retain(|_, v| v.abs() > f64::EPSILON * max);
        // Threshold pivoting: among entries within PIVOT_THRESHOLD of the
        // largest, the column met by the fewest later rows causes least fill.
        let col = work
            .iter()
            .filter(|(_, v)| v.abs() >= PIVOT_THRESHOLD * max)
            .min_by_key(|(c, _)| (remaining.get(c).copied().unwrap_or(0), **c))
            .map(|(c, _)| *c)
            .expect("nonzero row has a pivot");
        largest_pivot = largest_pivot.max(max);
        pivot_of_col.insert(col, pivots.len());
        pivots.push(PivotRow { col, row: work, rhs: b });
        kept.push(idx);
    }
    let mut out = ConstraintBlock::new(&block.label);
    for &k in &kept {
        out.push(block.rows[k].clone(), block.rhs[k]);
    }
    Ok(Reduced { block: out, kept, max_discarded_mismatch: max_mismatch })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn block(rows: &[&[f64]], rhs: &[f64]) -> ConstraintBlock {
        let mut b = ConstraintBlock::new("L");
        for (r, &v) in rows.iter().zip(rhs) {
            b.push(r.iter().enumerate().filter(|(_, x)| **x != 0.0).map(|(j, &x)| (j, x)).collect(), v);
        }
        b
    }

    #[test]
    fn identical_rows_collapse() {
        let b = block(&[&[1.0, 2.0], &[1.0, 2.0]], &[3.0, 3.0]);
        let r = eliminate_redundant_rows(&b, REDUNDANCY_TOL).unwrap();
        assert_eq!(r.kept, vec![0]);
    }

    #[test]
    fn full_rank_is_unchanged() {
        let b = block(&[&[2.0, 1.0, 0.0], &[1.0, 3.0, 1.0], &[0.0, 1.0, 4.0]], &[1.0, 2.0, 3.0]);
        let r = eliminate_redundant_rows(&b, REDUNDANCY_TOL).unwrap();
        assert_eq!(r.block, b);
    }

    #[test]
    fn inconsistent_redundant_row_is_an_error() {
        let b = block(&[&[1.0, 1.0], &[2.0, 2.0]], &[1.0, 2.5]);
        let err = eliminate_redundant_rows(&b, REDUNDANCY_TOL).unwrap_err();
        assert!(matches!(err, LinalgError::InfeasibleConstraints { row: 1, .. }));
    }

    #[test]
    fn idempotent() {
        let b = block(
            &[&[1.0, 0.0, 1.0, 0.0], &[0.0, 1.0, 0.0, 1.0], &[1.0, 1.0, 1.0, 1.0]],
            &[1.0, 2.0, 3.0],
        );
        let once = eliminate_redundant_rows(&b, REDUNDANCY_TOL).unwrap();
        assert_eq!(once.kept, vec![0, 1]);
        let twice = eliminate_redundant_rows(&once.block, REDUNDANCY_TOL).unwrap();
        assert_eq!(twice.block, once.block);
    }
}
