use nalgebra::DMatrix;
use rayon::prelude::*;

use super::knn::{brute_force_mean_distance, KdTree, Points};
use crate::error::{Error, Result};
use crate::linalg::lower_quantile;

/// Above this many rows neighbor search goes through a k-d tree.
pub const BRUTE_FORCE_MAX_ROWS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PruneConfig {
    /// Number of nearest neighbors averaged per candidate.
    pub r: usize,
    /// Norm quantile selecting the high-norm candidates.
    pub q: f64,
    /// Candidates whose mean distance reaches the `1 - eps` quantile are pruned.
    pub eps: f64,
}

impl Default for PruneConfig {
    fn default() -> Self {
        Self { r: 10, q: 0.75, eps: 0.95 }
    }
}

impl PruneConfig {
    pub fn validate(&self) -> Result<()> {
        if self.r == 0 {
            return Err(Error::InvalidArgument("prune needs r >= 1".into()));
        }
        for (name, v) in [("q", self.q), ("eps", self.eps)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidArgument(format!("prune {name} = {v} is outside (0, 1)")));
            }
        }
        Ok(())
    }
}

/// Row norms of `m`.
pub fn row_norms(m: &DMatrix<f64>) -> Vec<f64> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect()
}

/// High-norm candidates: rows whose norm reaches the lower `q` quantile.
pub fn high_norm_rows(m: &DMatrix<f64>, q: f64) -> Vec<usize> {
    let norms = row_norms(m);
    let cut = lower_quantile(&norms, q);
    (0..norms.len()).filter(|&i| norms[i] >= cut).collect()
}

/// Mean distance from each listed row to its `r` nearest other rows of `m`.
pub fn mean_neighbor_distances(m: &DMatrix<f64>, rows: &[usize], r: usize) -> Vec<f64> {
    let points = Points::from_rows(m);
    if m.nrows() <= BRUTE_FORCE_MAX_ROWS {
        rows.par_iter()
            .map(|&i| brute_force_mean_distance(&points, i, r))
            .collect()
    } else {
        let tree = KdTree::build(&points);
        rows.par_iter().map(|&i| tree.mean_distance(i, r)).collect()
    }
}

/// Rows of `m` with high norm and sparse neighborhoods, in increasing order.
///
/// Works on any row geometry, so it gives the same set on `V` and on `V V^T`.
pub fn prune(m: &DMatrix<f64>, config: &PruneConfig) -> Result<Vec<usize>> {
    config.validate()?;
    let n = m.nrows();
    if n <= config.r {
        return Err(Error::TooFewRows { n, r: config.r });
    }
    let candidates = high_norm_rows(m, config.q);
    let x = mean_neighbor_distances(m, &candidates, config.r);
    let cut = lower_quantile(&x, 1.0 - config.eps);
    Ok(candidates
        .iter()
        .zip(&x)
        .filter(|(_, &xi)| xi >= cut)
        .map(|(&i, _)| i)
        .collect())
}
