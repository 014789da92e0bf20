use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{MembershipMatrix, ModelParams};
use crate::spectral::Spectrum;

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationReport {
    /// `max_i ||e_i^T (V_hat V_hat^T - V V^T)||`.
    pub max_row_deviation: f64,
    /// The same row norms divided by `||e_i^T V||`.
    pub max_relative_row_deviation: f64,
    /// `max_i ||e_i^T V||^2` over the population eigenvectors.
    pub delocalization_max: f64,
    /// `min_i ||e_i^T V||^2`.
    pub delocalization_min: f64,
    /// `2 nu (1 + alpha_0) / n`.
    pub upper_bound: f64,
    /// `2 / (3 n)`.
    pub lower_bound: f64,
    pub upper_bound_holds: bool,
    pub lower_bound_holds: bool,
}

/// Per-row norms of `V_hat V_hat^T - V V^T` without forming either `n x n` matrix.
///
/// Row `i` is `V_hat a - V b` with `a = V_hat^T e_i`, `b = V^T e_i`; its squared
/// norm expands through the three `K x K` Gram matrices. Rows where that
/// expansion cancels badly are recomputed directly in `O(n K)`.
pub fn projection_row_deviations(v_hat: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<Vec<f64>> {
    if v_hat.nrows() != v.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvector row counts differ: {} vs {}",
            v_hat.nrows(),
            v.nrows()
        )));
    }
    let g_hat = v_hat.transpose() * v_hat;
    let g = v.transpose() * v;
    let cross = v_hat.transpose() * v;
    let out = (0..v.nrows())
        .into_par_iter()
        .map(|i| {
            let a = v_hat.row(i).transpose();
            let b = v.row(i).transpose();
            let aa = a.dot(&(&g_hat * &a));
            let bb = b.dot(&(&g * &b));
            let ab = a.dot(&(&cross * &b));
            let d2 = aa + bb - 2.0 * ab;
            if d2 > 1e-6 * (aa + bb) {
                d2.sqrt()
            } else {
                let diff: DVector<f64> = v_hat * &a - v * &b;
                diff.norm()
            }
        })
        .collect();
    Ok(out)
}

pub fn eigen_deviation_report(
    a_spectrum: &Spectrum,
    p_spectrum: &Spectrum,
    theta: &MembershipMatrix,
    params: &ModelParams,
) -> Result<DeviationReport> {
    let v_hat = &a_spectrum.eigenvectors;
    let v = &p_spectrum.eigenvectors;
    if v_hat.ncols() != v.ncols() || v.nrows() != theta.n() {
        return Err(Error::DimensionMismatch(format!(
            "spectra are {}x{} and {}x{}, theta has {} rows",
            v_hat.nrows(),
            v_hat.ncols(),
            v.nrows(),
            v.ncols(),
            theta.n()
        )));
    }
    let dev = projection_row_deviations(v_hat, v)?;
    let norms2: Vec<f64> = (0..v.nrows()).map(|i| v.row(i).norm_squared()).collect();
    let max_row_deviation = dev.iter().copied().fold(0.0, f64::max);
    let max_relative_row_deviation = dev
        .iter()
        .zip(&norms2)
        .map(|(d, n2)| d / n2.sqrt())
        .fold(0.0, f64::max);
    let delocalization_max = norms2.iter().copied().fold(0.0, f64::max);
    let delocalization_min = norms2.iter().copied().fold(f64::INFINITY, f64::min);
    let n = theta.n() as f64;
    let upper_bound = 2.0 * params.nu() * (1.0 + params.alpha0()) / n;
    let lower_bound = 2.0 / (3.0 * n);
    Ok(DeviationReport {
        max_row_deviation,
        max_relative_row_deviation,
        delocalization_max,
        delocalization_min,
        upper_bound,
        lower_bound,
        upper_bound_holds: delocalization_max <= upper_bound,
        lower_bound_holds: delocalization_min >= lower_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_matches_lazy() {
        let a = DMatrix::from_row_slice(4, 2, &[0.5, 0.5, 0.5, -0.5, 0.5, 0.5, 0.5, -0.5]);
        let b = DMatrix::from_row_slice(4, 2, &[0.6, 0.0, 0.0, 0.8, 0.8, 0.0, 0.0, -0.6]);
        let explicit = &a * a.transpose() - &b * b.transpose();
        let lazy = projection_row_deviations(&a, &b).unwrap();
        for (i, d) in lazy.iter().enumerate() {
            assert!((d - explicit.row(i).norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn same_subspace_gives_zero() {
        let a = DMatrix::from_row_slice(3, 1, &[0.6, 0.8, 0.0]);
        let b = -&a;
        let lazy = projection_row_deviations(&a, &b).unwrap();
        assert!(lazy.iter().all(|&d| d < 1e-15));
    }
}
