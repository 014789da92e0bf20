//! Leading eigenpairs of symmetric matrices, selected by eigenvalue magnitude.
//!
//! Small problems go through a full dense decomposition; larger ones through a
//! thick-restart Lanczos iteration that only needs matrix-vector products.
//! Both backends sort and sign-normalize their output the same way.

mod discretize;
mod lanczos;

pub use discretize::{discretize_eigenvalues, EigenInterval, EigenIntervalPartition};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::SymmetricOperator;
use crate::model::{MembershipMatrix, ModelParams};

pub const DEFAULT_TOL: f64 = 1e-8;

/// Largest dimension handled by the dense backend.
pub const DENSE_MAX_DIM: usize = 512;

/// Top-K eigenpairs sorted by descending `|lambda|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: DVector<f64>,
    /// `n x K`, orthonormal columns.
    pub eigenvectors: DMatrix<f64>,
    /// `||A v - lambda v||` per pair.
    pub residuals: DVector<f64>,
}

impl Spectrum {
    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn n(&self) -> usize {
        self.eigenvectors.nrows()
    }

    /// `V E V^T`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let v = &self.eigenvectors;
        v * DMatrix::from_diagonal(&self.eigenvalues) * v.transpose()
    }

    /// `V V^T`.
    pub fn projection(&self) -> DMatrix<f64> {
        &self.eigenvectors * self.eigenvectors.transpose()
    }
}

#[derive(Debug, Clone)]
pub struct EigenOptions {
    pub tol: f64,
    /// Restart budget for the iterative backend; `None` means `300 * K`.
    pub max_restarts: Option<usize>,
    /// Seed of the fixed Lanczos starting vector.
    pub seed: u64,
    pub dense_max_dim: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_restarts: None,
            seed: 0x5eed,
            dense_max_dim: DENSE_MAX_DIM,
        }
    }
}

impl EigenOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

/// The `k` eigenpairs of largest magnitude, with default options and the given tolerance.
pub fn top_k_eigs<O: SymmetricOperator + ?Sized>(op: &O, k: usize, tol: f64) -> Result<Spectrum> {
    top_k_eigs_with(op, k, &EigenOptions::with_tol(tol))
}

pub fn top_k_eigs_with<O: SymmetricOperator + ?Sized>(op: &O, k: usize, options: &EigenOptions) -> Result<Spectrum> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("cannot take {k} eigenpairs of a {n}x{n} matrix")));
    }
    if n <= options.dense_max_dim {
        let spectrum = dense_top_k(&op.to_dense(), k);
        return Ok(spectrum);
    }
    let (values, vectors) = lanczos::thick_restart(op, k, options)?;
    Ok(finish(op, values, vectors))
}

/// Full dense decomposition followed by magnitude selection.
pub fn dense_top_k(m: &DMatrix<f64>, k: usize) -> Spectrum {
    let eig = m.clone().symmetric_eigen();
    let order = magnitude_order(eig.eigenvalues.as_slice());
    let chosen = &order[..k];
    let values: Vec<f64> = chosen.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), k, |r, c| eig.eigenvectors[(r, chosen[c])]);
    finish(m, values, vectors)
}

/// Exact spectrum of `P = rho Theta B Theta^T` from its rank-K factorization.
///
/// With `Theta = Q R` (thin QR), `P = Q (rho R B R^T) Q^T`, so the nonzero
/// eigenpairs come from a `K x K` problem. Costs `O(n K^2)` instead of `O(n^3)`.
pub fn population_spectrum(theta: &MembershipMatrix, params: &ModelParams) -> Result<Spectrum> {
    if theta.k() != params.k() {
        return Err(Error::DimensionMismatch(format!(
            "theta has {} columns, model has K = {}",
            theta.k(),
            params.k()
        )));
    }
    let qr = theta.matrix().clone().qr();
    let q = qr.q();
    let r = qr.r();
    let mut core = &r * params.scaled_b() * r.transpose();
    crate::linalg::symmetrize(&mut core);
    let eig = core.symmetric_eigen();
    let k = params.k();
    let order = magnitude_order(eig.eigenvalues.as_slice());
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let u = DMatrix::from_fn(k, k, |r, c| eig.eigenvectors[(r, order[c])]);
    let mut vectors = q * u;
    for c in 0..k {
        normalize_sign(vectors.column_mut(c).as_mut_slice());
    }
    // residuals measured against the factored operator, without forming P
    let t = theta.matrix();
    let rb = params.scaled_b();
    let residuals = DVector::from_fn(k, |c, _| {
        let v = vectors.column(c);
        let av = t * (&rb * (t.transpose() * v));
        (av - v * values[c]).norm()
    });
    Ok(Spectrum {
        eigenvalues: DVector::from_vec(values),
        eigenvectors: vectors,
        residuals,
    })
}

/// Indices sorted by descending magnitude. Magnitudes equal to within a relative
/// `1e-12` form one tie group, inside which positive values come first and then
/// lower original indices.
pub(crate) fn magnitude_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].abs().total_cmp(&values[a].abs()).then(a.cmp(&b)));
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let tie = 1e-12 * scale;
    let mut out = Vec::with_capacity(idx.len());
    let mut start = 0;
    while start < idx.len() {
        let lead = values[idx[start]].abs();
        let mut end = start + 1;
        while end < idx.len() && lead - values[idx[end]].abs() <= tie {
            end += 1;
        }
        let mut group = idx[start..end].to_vec();
        group.sort_by(|&a, &b| (values[a] < 0.0).cmp(&(values[b] < 0.0)).then(a.cmp(&b)));
        out.extend(group);
        start = end;
    }
    out
}

/// Flips `v` so its entry of largest magnitude is positive (first such entry on ties).
pub(crate) fn normalize_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|x| *x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn finish<O: SymmetricOperator + ?Sized>(op: &O, values: Vec<f64>, mut vectors: DMatrix<f64>) -> Spectrum {
    let n = vectors.nrows();
    let k = values.len();
    let mut residuals = DVector::zeros(k);
    let mut av = vec![0.0; n];
    for c in 0..k {
        normalize_sign(vectors.column_mut(c).as_mut_slice());
        let v = vectors.column(c);
        op.apply(v.as_slice(), &mut av);
        residuals[c] = av
            .iter()
            .zip(v.iter())
            .map(|(a, x)| (a - values[c] * x).powi(2))
            .sum::<f64>()
            .sqrt();
    }
    Spectrum {
        eigenvalues: DVector::from_vec(values),
        eigenvectors: vectors,
        residuals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::SparseSymmetricGraph;

    #[test]
    fn two_cycle_orders_positive_first() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let s = top_k_eigs(&m, 2, DEFAULT_TOL).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!((s.eigenvalues[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn magnitude_order_tie_rules() {
        assert_eq!(magnitude_order(&[-2.0, 1.0, 2.0, 0.5]), vec![2, 0, 1, 3]);
        assert_eq!(magnitude_order(&[3.0, 3.0, -3.0]), vec![0, 1, 2]);
    }

    #[test]
    fn sign_convention() {
        let mut v = [0.1, -0.9, 0.3];
        normalize_sign(&mut v);
        assert_eq!(v, [-0.1, 0.9, -0.3]);
        let mut tie = [-0.5, 0.5];
        normalize_sign(&mut tie);
        assert_eq!(tie, [0.5, -0.5]);
    }

    #[test]
    fn rejects_too_many_pairs() {
        let m = DMatrix::<f64>::identity(3, 3);
        assert!(top_k_eigs(&m, 4, DEFAULT_TOL).is_err());
        assert!(top_k_eigs(&m, 0, DEFAULT_TOL).is_err());
    }

    #[test]
    fn lanczos_matches_dense_on_planted_spikes() {
        use rand::{Rng, SeedableRng};
        let n = 600;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let mut m = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
        m = (&m + m.transpose()) * (0.5 / (n as f64).sqrt());
        for (s, val) in [(0usize, 8.0), (1, -6.0), (2, 4.0)] {
            let u = DVector::from_fn(n, |i, _| if i % 3 == s { 1.0 } else { 0.0 }).normalize();
            m += &u * u.transpose() * val;
        }
        let iterative = top_k_eigs_with(&m, 3, &EigenOptions::default()).unwrap();
        let dense = dense_top_k(&m, 3);
        for c in 0..3 {
            assert!((iterative.eigenvalues[c] - dense.eigenvalues[c]).abs() < 1e-8);
            assert!(iterative.residuals[c] < 1e-6);
            let diff = (iterative.eigenvectors.column(c) - dense.eigenvectors.column(c)).norm();
            assert!(diff < 1e-6, "column {c} differs by {diff}");
        }
    }

    #[test]
    fn lanczos_on_sparse_cycle_union() {
        // two disjoint cycles plus a clique give a well separated top eigenvalue
        let n = 700;
        let mut edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        for a in 0..20 {
            for b in a + 1..20 {
                edges.push((a, b));
            }
        }
        let (g, _) = SparseSymmetricGraph::from_edges(n, edges).unwrap();
        let iterative = top_k_eigs_with(&g, 1, &EigenOptions::default()).unwrap();
        let dense = dense_top_k(&g.to_dense(), 1);
        assert!((iterative.eigenvalues[0] - dense.eigenvalues[0]).abs() < 1e-8);
    }
}
