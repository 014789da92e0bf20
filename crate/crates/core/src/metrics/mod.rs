//! Comparisons of estimated memberships against ground truth.
//!
//! Membership estimates are only defined up to a relabeling of communities, so
//! every metric first matches estimated columns to true columns.

mod assignment;
mod deviation;
mod spearman;

pub use assignment::{assignment_cost, max_weight_assignment, min_cost_assignment};
pub use deviation::{eigen_deviation_report, projection_row_deviations, DeviationReport};
pub use spearman::{average_ranks, spearman};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::permutations;

/// Largest `K` aligned by enumerating all permutations.
pub const BRUTE_FORCE_MAX_K: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentResult {
    /// Column `a` of the estimate is matched to truth column `permutation[a]`.
    pub permutation: Vec<usize>,
    /// `||Theta_hat - Theta Pi||_F` at the optimum.
    pub cost: f64,
}

fn check_shapes(theta_hat: &DMatrix<f64>, theta: &DMatrix<f64>) -> Result<()> {
    if theta_hat.shape() != theta.shape() {
        return Err(Error::DimensionMismatch(format!(
            "estimate is {}x{}, truth is {}x{}",
            theta_hat.nrows(),
            theta_hat.ncols(),
            theta.nrows(),
            theta.ncols()
        )));
    }
    Ok(())
}

/// `C[a, b] = ||Theta_hat[:, a] - Theta[:, b]||^2`.
fn column_cost(theta_hat: &DMatrix<f64>, theta: &DMatrix<f64>) -> DMatrix<f64> {
    let k = theta.ncols();
    DMatrix::from_fn(k, k, |a, b| (theta_hat.column(a) - theta.column(b)).norm_squared())
}

/// Permutation minimizing `||Theta_hat - Theta Pi||_F`, by enumeration for
/// `K <= 8` and by assignment otherwise.
pub fn align_columns(theta_hat: &DMatrix<f64>, theta: &DMatrix<f64>) -> Result<AlignmentResult> {
    if theta.ncols() <= BRUTE_FORCE_MAX_K {
        align_columns_brute_force(theta_hat, theta)
    } else {
        align_columns_assignment(theta_hat, theta)
    }
}

/// Exhaustive search; the first optimum in lexicographic order wins.
pub fn align_columns_brute_force(theta_hat: &DMatrix<f64>, theta: &DMatrix<f64>) -> Result<AlignmentResult> {
    check_shapes(theta_hat, theta)?;
    let cost = column_cost(theta_hat, theta);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for p in permutations(theta.ncols()) {
        let c = assignment_cost(&cost, &p);
        if best.as_ref().is_none_or(|(bc, _)| c < *bc) {
            best = Some((c, p));
        }
    }
    let (c, permutation) = best.expect("at least one permutation");
    Ok(AlignmentResult {
        permutation,
        cost: c.max(0.0).sqrt(),
    })
}

pub fn align_columns_assignment(theta_hat: &DMatrix<f64>, theta: &DMatrix<f64>) -> Result<AlignmentResult> {
    check_shapes(theta_hat, theta)?;
    let cost = column_cost(theta_hat, theta);
    let permutation = min_cost_assignment(&cost);
    let c = assignment_cost(&cost, &permutation);
    Ok(AlignmentResult {
        permutation,
        cost: c.max(0.0).sqrt(),
    })
}

/// `Theta Pi` for a permutation returned by [`align_columns`].
pub fn permute_truth(theta: &DMatrix<f64>, permutation: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(theta.nrows(), theta.ncols(), |i, a| theta[(i, permutation[a])])
}

/// Frobenius norm with column contributions summed in sorted order, so the
/// result is bitwise invariant under column permutations.
fn column_order_free_norm(m: &DMatrix<f64>) -> f64 {
    let mut cols: Vec<f64> = m.column_iter().map(|c| c.norm_squared()).collect();
    cols.sort_by(f64::total_cmp);
    cols.iter().sum::<f64>().sqrt()
}

/// `min_Pi ||Theta_hat - Theta Pi||_F / ||Theta||_F`.
pub fn relative_frobenius_error(theta_hat: &DMatrix<f64>, theta: &DMatrix<f64>) -> Result<f64> {
    check_shapes(theta_hat, theta)?;
    let scale = column_order_free_norm(theta);
    if scale == 0.0 {
        return Err(Error::InvalidArgument("ground truth has zero Frobenius norm".into()));
    }
    let aligned = align_columns(theta_hat, theta)?;
    let diff = theta_hat - permute_truth(theta, &aligned.permutation);
    Ok(column_order_free_norm(&diff) / scale)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowwiseReport {
    /// Max over non-zeroed estimate rows of `||e_i^T (Theta_hat - Theta Pi)|| / ||e_i^T Theta||`.
    pub max_relative_error: f64,
    /// Estimate rows that are entirely zero; excluded from the maximum.
    pub zeroed_rows: usize,
}

pub fn max_rowwise_relative_error(theta_hat: &DMatrix<f64>, theta: &DMatrix<f64>) -> Result<RowwiseReport> {
    check_shapes(theta_hat, theta)?;
    if let Some(i) = (0..theta.nrows()).find(|&i| theta.row(i).norm() == 0.0) {
        return Err(Error::InvalidArgument(format!("ground-truth row {i} has zero norm")));
    }
    let aligned = align_columns(theta_hat, theta)?;
    let truth = permute_truth(theta, &aligned.permutation);
    let mut worst = 0.0_f64;
    let mut zeroed_rows = 0;
    for i in 0..theta.nrows() {
        if theta_hat.row(i).iter().all(|&v| v == 0.0) {
            zeroed_rows += 1;
            continue;
        }
        worst = worst.max((theta_hat.row(i) - truth.row(i)).norm() / truth.row(i).norm());
    }
    Ok(RowwiseReport {
        max_relative_error: worst,
        zeroed_rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RcReport {
    pub value: f64,
    /// Estimate column `a` is paired with truth column `permutation[a]`.
    pub permutation: Vec<usize>,
    /// All-zero ground-truth rows left out of the correlation.
    pub excluded_rows: usize,
}

/// Average Spearman correlation between matched columns, maximized over matchings.
pub fn rc_avg(theta_hat: &DMatrix<f64>, theta: &DMatrix<f64>) -> Result<f64> {
    rc_avg_report(theta_hat, theta).map(|r| r.value)
}

pub fn rc_avg_report(theta_hat: &DMatrix<f64>, theta: &DMatrix<f64>) -> Result<RcReport> {
    check_shapes(theta_hat, theta)?;
    let rows: Vec<usize> = (0..theta.nrows())
        .filter(|&i| theta.row(i).iter().any(|&v| v != 0.0))
        .collect();
    if rows.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "rank correlation needs two rows with ground truth, got {}",
            rows.len()
        )));
    }
    let k = theta.ncols();
    let column = |m: &DMatrix<f64>, c: usize| -> Vec<f64> { rows.iter().map(|&i| m[(i, c)]).collect() };
    let hat_cols: Vec<Vec<f64>> = (0..k).map(|a| column(theta_hat, a)).collect();
    let true_cols: Vec<Vec<f64>> = (0..k).map(|b| column(theta, b)).collect();
    let rc = DMatrix::from_fn(k, k, |a, b| spearman(&hat_cols[a], &true_cols[b]));
    let permutation = max_weight_assignment(&rc);
    let value = assignment_cost(&rc, &permutation) / k as f64;
    Ok(RcReport {
        value,
        permutation,
        excluded_rows: theta.nrows() - rows.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DMatrix<f64> {
        DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, 0.3, 0.7, 0.6, 0.4])
    }

    #[test]
    fn identity_alignment() {
        let t = sample();
        let a = align_columns(&t, &t).unwrap();
        assert_eq!(a.permutation, vec![0, 1]);
        assert_eq!(a.cost, 0.0);
        assert_eq!(relative_frobenius_error(&t, &t).unwrap(), 0.0);
        assert_eq!(rc_avg(&t, &t).unwrap(), 1.0);
    }

    #[test]
    fn swapped_columns_align_to_zero() {
        let t = sample();
        let swapped = permute_truth(&t, &[1, 0]);
        let a = align_columns(&swapped, &t).unwrap();
        assert_eq!(a.permutation, vec![1, 0]);
        assert_eq!(a.cost, 0.0);
        assert_eq!(relative_frobenius_error(&swapped, &t).unwrap(), 0.0);
    }

    #[test]
    fn zero_estimate_has_unit_error() {
        let t = sample();
        assert_eq!(relative_frobenius_error(&DMatrix::zeros(4, 2), &t).unwrap(), 1.0);
    }

    #[test]
    fn frobenius_by_hand() {
        // truth rows (1,0),(0,1); estimate rows (0.8,0.2),(0.1,0.9)
        // diff entries 0.2,0.2,0.1,0.1 -> sqrt(0.1) / sqrt(2)
        let t = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let h = DMatrix::from_row_slice(2, 2, &[0.8, 0.2, 0.1, 0.9]);
        let err = relative_frobenius_error(&h, &t).unwrap();
        assert!((err - (0.1_f64 / 2.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rowwise_single_changed_row() {
        let t = sample();
        let mut h = t.clone();
        h[(2, 0)] = 0.5;
        h[(2, 1)] = 0.5;
        let expected = (0.2_f64 * 0.2 * 2.0).sqrt() / (0.3_f64 * 0.3 + 0.7 * 0.7).sqrt();
        let r = max_rowwise_relative_error(&h, &t).unwrap();
        assert!((r.max_relative_error - expected).abs() < 1e-15);
        assert_eq!(r.zeroed_rows, 0);
    }

    #[test]
    fn rowwise_counts_zeroed_rows() {
        let t = sample();
        let mut h = t.clone();
        h[(3, 0)] = 0.0;
        h[(3, 1)] = 0.0;
        let r = max_rowwise_relative_error(&h, &t).unwrap();
        assert_eq!(r.max_relative_error, 0.0);
        assert_eq!(r.zeroed_rows, 1);
    }

    #[test]
    fn rc_reversed_ranks() {
        // every truth column increases and every estimate column decreases,
        // so each pairing scores -1
        let t = DMatrix::from_row_slice(4, 2, &[1.0, 2.0, 2.0, 3.5, 3.0, 4.0, 4.0, 5.5]);
        let h = DMatrix::from_row_slice(4, 2, &[0.9, 0.8, 0.7, 0.5, 0.4, 0.3, 0.1, 0.0]);
        assert!((rc_avg(&h, &t).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn rc_excludes_rows_without_truth() {
        let t = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0]);
        let r = rc_avg_report(&t, &t).unwrap();
        assert_eq!(r.excluded_rows, 1);
        assert_eq!(r.value, 1.0);
    }

    #[test]
    fn shape_mismatch() {
        let t = sample();
        assert!(align_columns(&DMatrix::zeros(3, 2), &t).is_err());
    }
}
