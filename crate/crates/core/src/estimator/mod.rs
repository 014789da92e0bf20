//! SPACL: prune high-norm outliers from the leading eigenvector rows, locate
//! one pure node per community by successive projection, then recover the
//! memberships and the connectivity matrix from those corners.

mod diagnostic;
mod knn;
mod prune;
mod spa;

pub use diagnostic::{procrustes_rotation, pruning_diagnostic, DiagnosticReport};
pub use prune::{high_norm_rows, mean_neighbor_distances, prune, row_norms, PruneConfig, BRUTE_FORCE_MAX_ROWS};
pub use spa::{spa, MIN_PICK_NORM};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::SymmetricOperator;
use crate::linalg::{max_entry, select_rows, singular_values, symmetrize};
use crate::model::MembershipMatrix;
use crate::spectral::{top_k_eigs_with, EigenOptions, Spectrum};

/// Membership entries below this are set to zero before row normalization.
pub const DEFAULT_THRESHOLD: f64 = 1e-12;

/// Corner matrices with a larger condition number are rejected.
pub const MAX_CORNER_CONDITION: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct SpaclOptions {
    pub prune: PruneConfig,
    pub prune_enabled: bool,
    /// Zeroing threshold applied after clipping negatives; 0 disables it.
    pub threshold: f64,
    pub eigen: EigenOptions,
}

impl Default for SpaclOptions {
    fn default() -> Self {
        Self {
            prune: PruneConfig::default(),
            prune_enabled: true,
            threshold: DEFAULT_THRESHOLD,
            eigen: EigenOptions::default(),
        }
    }
}

impl SpaclOptions {
    pub fn without_prune() -> Self {
        Self {
            prune_enabled: false,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub theta_hat: MembershipMatrix,
    /// Symmetric, max entry 1.
    pub b_hat: DMatrix<f64>,
    pub rho_hat: f64,
    /// One node per community, in selection order; column `a` of `theta_hat`
    /// belongs to `pure_indices[a]`.
    pub pure_indices: Vec<usize>,
    /// Sorted, disjoint from `pure_indices`.
    pub pruned_set: Vec<usize>,
    pub spectrum: Spectrum,
    /// Condition number of the corner matrix `V[pure_indices, :]`.
    pub corner_condition: f64,
}

impl FitResult {
    /// `rho_hat * b_hat`.
    pub fn scaled_b(&self) -> DMatrix<f64> {
        &self.b_hat * self.rho_hat
    }
}

/// Runs the full pipeline on a symmetric operator (adjacency or population matrix).
pub fn spacl<O: SymmetricOperator + ?Sized>(op: &O, k: usize, options: &SpaclOptions) -> Result<FitResult> {
    let spectrum = top_k_eigs_with(op, k, &options.eigen)?;
    spacl_from_spectrum(spectrum, options)
}

/// Runs everything after the eigendecomposition.
pub fn spacl_from_spectrum(spectrum: Spectrum, options: &SpaclOptions) -> Result<FitResult> {
    let v = &spectrum.eigenvectors;
    let (n, k) = v.shape();
    let pruned_set = if options.prune_enabled {
        prune(v, &options.prune)?
    } else {
        Vec::new()
    };
    let mut is_pruned = vec![false; n];
    for &i in &pruned_set {
        is_pruned[i] = true;
    }
    let kept: Vec<usize> = (0..n).filter(|&i| !is_pruned[i]).collect();
    if kept.len() < k {
        return Err(Error::InvalidArgument(format!(
            "pruning left {} rows, fewer than K = {k}",
            kept.len()
        )));
    }
    let picks = spa(&select_rows(v, &kept), k)?;
    let pure_indices: Vec<usize> = picks.iter().map(|&p| kept[p]).collect();

    let corners = select_rows(v, &pure_indices);
    let sv = singular_values(&corners);
    let condition = sv[0] / sv[k - 1];
    if !condition.is_finite() || condition > MAX_CORNER_CONDITION {
        return Err(Error::SingularCorners {
            condition,
            candidates: pure_indices,
        });
    }

    // theta_hat^T solves corners^T Y = V^T
    let lu = corners.transpose().lu();
    let y = lu.solve(&v.transpose()).ok_or_else(|| Error::SingularCorners {
        condition,
        candidates: pure_indices.clone(),
    })?;
    let mut raw = y.transpose();
    // clipping negatives and zeroing tiny entries are one cut at max(threshold, 0)
    let cut = options.threshold.max(0.0);
    raw.iter_mut().filter(|x| **x < cut).for_each(|x| *x = 0.0);
    let theta_hat = MembershipMatrix::from_unnormalized(raw)?;

    let mut scaled = &corners * DMatrix::from_diagonal(&spectrum.eigenvalues) * corners.transpose();
    symmetrize(&mut scaled);
    let rho_hat = max_entry(&scaled);
    if rho_hat.is_nan() || rho_hat <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "estimated connectivity has no positive entry (max {rho_hat:.3e})"
        )));
    }
    let b_hat = scaled / rho_hat;

    Ok(FitResult {
        theta_hat,
        b_hat,
        rho_hat,
        pure_indices,
        pruned_set,
        spectrum,
        corner_condition: condition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use crate::sampling::{build_population_matrix, sample_theta, SamplerConfig};

    fn noiseless(seed: u64) -> (MembershipMatrix, ModelParams, FitResult) {
        let b = DMatrix::from_row_slice(3, 3, &[1.0, 0.2, 0.1, 0.2, 0.8, 0.3, 0.1, 0.3, 0.9]);
        let params = ModelParams::new(200, vec![0.5; 3], b, 0.3).unwrap();
        let theta = sample_theta(&params, &SamplerConfig::new(seed)).unwrap();
        let p = build_population_matrix(&theta, &params).unwrap();
        let fit = spacl(p.matrix(), 3, &SpaclOptions::without_prune()).unwrap();
        (theta, params, fit)
    }

    #[test]
    fn population_input_recovers_parameters() {
        let (theta, params, fit) = noiseless(3);
        // column a of theta_hat is the community of pure node pure_indices[a]
        let perm: Vec<usize> = fit
            .pure_indices
            .iter()
            .map(|&i| theta.pure_community(i).expect("picked a pure row"))
            .collect();
        let aligned = theta.permute_columns(&perm);
        let err = (fit.theta_hat.matrix() - aligned.matrix()).norm() / theta.matrix().norm();
        assert!(err < 1e-8, "theta error {err}");
        let rb = params.scaled_b();
        let rb_perm = DMatrix::from_fn(3, 3, |a, c| rb[(perm[a], perm[c])]);
        assert!((fit.scaled_b() - rb_perm).norm() < 1e-8);
        assert!((fit.rho_hat - 0.3).abs() < 1e-10);
    }

    #[test]
    fn b_hat_is_normalized() {
        let (_, _, fit) = noiseless(5);
        assert_eq!(max_entry(&fit.b_hat), 1.0);
        assert_eq!(fit.b_hat, fit.b_hat.transpose());
    }

    #[test]
    fn pruned_and_pure_are_disjoint() {
        let (_, _, fit) = noiseless(8);
        let opts = SpaclOptions::default();
        let pruned = spacl_from_spectrum(fit.spectrum.clone(), &opts).unwrap();
        assert!(pruned.pure_indices.iter().all(|i| !pruned.pruned_set.contains(i)));
        assert!(pruned.pruned_set.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn singular_corners_rejected() {
        // two identical eigenvector columns make every corner matrix singular
        let col = DMatrix::from_fn(30, 1, |i, _| 1.0 + i as f64);
        let v = DMatrix::from_fn(30, 2, |i, j| col[(i, 0)] * if j == 0 { 1.0 } else { 1.0 + 1e-15 });
        let spectrum = Spectrum {
            eigenvalues: nalgebra::DVector::from_vec(vec![2.0, 1.0]),
            eigenvectors: v,
            residuals: nalgebra::DVector::zeros(2),
        };
        let err = spacl_from_spectrum(spectrum, &SpaclOptions::without_prune()).unwrap_err();
        assert!(matches!(err, Error::RankDeficient { .. } | Error::SingularCorners { .. }));
    }
}
