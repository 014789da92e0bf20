//! Neighborhood-density check of the pruning step against ground truth.
//!
//! The empirical rows are rotated onto the population rows, then the number of
//! empirical rows inside an `epsilon` ball is compared between the population
//! corners and the high-norm nodes. A high-norm node whose ball is sparser than
//! every corner ball can be pruned without touching the corners.

use nalgebra::DMatrix;

use super::prune::{high_norm_rows, prune, row_norms, PruneConfig};
use crate::error::{Error, Result};
use crate::model::MembershipMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticReport {
    /// Ball radius; the median row deviation unless supplied.
    pub epsilon: f64,
    /// Largest population row norm `y`.
    pub max_population_norm: f64,
    /// Empirical rows within `epsilon` of each population corner.
    pub corner_counts: Vec<usize>,
    /// `min(corner_counts)`.
    pub delta: usize,
    /// Nodes with `||V_hat_i|| >= y + epsilon`.
    pub high_norm: Vec<usize>,
    pub high_norm_fraction: f64,
    /// Fraction of `high_norm` whose ball count is below `delta`; `None` when empty.
    pub prunable_fraction: Option<f64>,
    /// The same two quantities for the quantile-based candidate set used by prune.
    pub quantile_high_norm_fraction: f64,
    pub quantile_prunable_fraction: Option<f64>,
    /// `|prune(V_hat)| / n`.
    pub pruned_fraction: f64,
}

/// Orthogonal `O` minimizing `||from O - to||_F`.
pub fn procrustes_rotation(from: &DMatrix<f64>, to: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = (from.transpose() * to).svd(true, true);
    svd.u.unwrap() * svd.v_t.unwrap()
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn ball_count(rows: &DMatrix<f64>, center: &[f64], radius: f64) -> usize {
    let r2 = radius * radius;
    (0..rows.nrows())
        .filter(|&j| {
            let d2: f64 = rows.row(j).iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
            d2 <= r2
        })
        .count()
}

fn prunable(rotated: &DMatrix<f64>, set: &[usize], epsilon: f64, delta: usize) -> Option<f64> {
    if set.is_empty() {
        return None;
    }
    let below = set
        .iter()
        .filter(|&&i| {
            let center: Vec<f64> = rotated.row(i).iter().copied().collect();
            ball_count(rotated, &center, epsilon) < delta
        })
        .count();
    Some(below as f64 / set.len() as f64)
}

/// `v_hat` holds the empirical eigenvectors, `v_p` the `K x K` population
/// corner rows, so the population eigenvectors are `Theta V_P`.
pub fn pruning_diagnostic(
    v_hat: &DMatrix<f64>,
    theta: &MembershipMatrix,
    v_p: &DMatrix<f64>,
    config: &PruneConfig,
    epsilon_ball: Option<f64>,
) -> Result<DiagnosticReport> {
    let (n, k) = v_hat.shape();
    if theta.n() != n || theta.k() != k || v_p.shape() != (k, k) {
        return Err(Error::DimensionMismatch(format!(
            "v_hat is {n}x{k}, theta {}x{}, v_p {}x{}",
            theta.n(),
            theta.k(),
            v_p.nrows(),
            v_p.ncols()
        )));
    }
    let v = theta.matrix() * v_p;
    let rotated = v_hat * procrustes_rotation(v_hat, &v);
    let epsilon = match epsilon_ball {
        Some(e) => e,
        None => median(&mut row_norms(&(&rotated - &v))),
    };
    let y = row_norms(&v).into_iter().fold(0.0, f64::max);

    let corner_counts: Vec<usize> = (0..k)
        .map(|c| {
            let center: Vec<f64> = v_p.row(c).iter().copied().collect();
            ball_count(&rotated, &center, epsilon)
        })
        .collect();
    let delta = corner_counts.iter().copied().min().unwrap_or(0);

    let norms = row_norms(v_hat);
    let high_norm: Vec<usize> = (0..n).filter(|&i| norms[i] >= y + epsilon).collect();
    let quantile_set = high_norm_rows(v_hat, config.q);
    let pruned = prune(v_hat, config)?;

    Ok(DiagnosticReport {
        epsilon,
        max_population_norm: y,
        delta,
        high_norm_fraction: high_norm.len() as f64 / n as f64,
        prunable_fraction: prunable(&rotated, &high_norm, epsilon, delta),
        quantile_high_norm_fraction: quantile_set.len() as f64 / n as f64,
        quantile_prunable_fraction: prunable(&rotated, &quantile_set, epsilon, delta),
        pruned_fraction: pruned.len() as f64 / n as f64,
        corner_counts,
        high_norm,
    })
}
