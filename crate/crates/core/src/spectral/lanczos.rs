//! Thick-restart Lanczos with full reorthogonalization.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{magnitude_order, EigenOptions};
use crate::error::{Error, Result};
use crate::graph::SymmetricOperator;

/// Column-major `n x cols` basis with contiguous columns.
struct Basis {
    n: usize,
    data: Vec<f64>,
}

impl Basis {
    fn new(n: usize, cols: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * cols],
        }
    }

    fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.n..(j + 1) * self.n]
    }

    /// Two passes of classical Gram-Schmidt of `w` against columns `0..cols`.
    /// Returns the accumulated coefficients.
    fn orthogonalize(&self, w: &mut [f64], cols: usize) -> Vec<f64> {
        let mut total = vec![0.0; cols];
        for _ in 0..2 {
            let h: Vec<f64> = (0..cols).map(|i| dot(self.col(i), w)).collect();
            for (i, hi) in h.iter().enumerate() {
                axpy(-hi, self.col(i), w);
                total[i] += hi;
            }
        }
        total
    }

    /// Replaces columns `0..s.ncols()` by `basis[:, 0..s.nrows()] * s`.
    fn rotate(&mut self, s: &DMatrix<f64>) {
        let (m, p) = (s.nrows(), s.ncols());
        let mut out = vec![0.0; self.n * p];
        for c in 0..p {
            let dst = &mut out[c * self.n..(c + 1) * self.n];
            for r in 0..m {
                let coef = s[(r, c)];
                if coef != 0.0 {
                    axpy(coef, self.col(r), dst);
                }
            }
        }
        self.data[..self.n * p].copy_from_slice(&out);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

fn random_unit_orthogonal(basis: &Basis, cols: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..basis.n).map(|_| rng.random::<f64>() - 0.5).collect();
        basis.orthogonalize(&mut v, cols);
        let nv = norm(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nv);
            return v;
        }
    }
}

/// Returns the `k` Ritz pairs of largest magnitude, converged to
/// `tol * max(1, |lambda|_max)` in residual norm.
pub(super) fn thick_restart<O: SymmetricOperator + ?Sized>(
    op: &O,
    k: usize,
    options: &EigenOptions,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = op.dim();
    let m = n.min((2 * k + 20).max(k + 30));
    let max_restarts = options.max_restarts.unwrap_or(300 * k);
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);

    let mut basis = Basis::new(n, m);
    let start = random_unit_orthogonal(&basis, 0, &mut rng);
    basis.col_mut(0).copy_from_slice(&start);

    // projected matrix basis^T A basis
    let mut t = DMatrix::<f64>::zeros(m, m);
    let mut kept = 0;
    let mut w = vec![0.0; n];
    let mut worst = f64::INFINITY;

    for _restart in 0..=max_restarts {
        let mut residual_norm = 0.0;
        let mut residual = vec![0.0; n];
        for j in kept..m {
            op.apply(basis.col(j), &mut w);
            let scale = norm(&w);
            let h = basis.orthogonalize(&mut w, j + 1);
            for (i, hi) in h.iter().enumerate() {
                t[(i, j)] = *hi;
                t[(j, i)] = *hi;
            }
            let beta = norm(&w);
            let breakdown = beta <= 1e-12 * scale.max(f64::MIN_POSITIVE) || beta == 0.0;
            if j + 1 < m {
                if breakdown {
                    // invariant subspace found; continue in a fresh direction
                    let v = random_unit_orthogonal(&basis, j + 1, &mut rng);
                    basis.col_mut(j + 1).copy_from_slice(&v);
                } else {
                    let next = basis.col_mut(j + 1);
                    for (d, s) in next.iter_mut().zip(&w) {
                        *d = s / beta;
                    }
                }
            } else if !breakdown {
                residual_norm = beta;
                residual.copy_from_slice(&w);
            }
        }

        let eig = t.clone().symmetric_eigen();
        let order = magnitude_order(eig.eigenvalues.as_slice());
        let anorm = eig.eigenvalues.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let threshold = options.tol * anorm.max(1.0);
        worst = order[..k]
            .iter()
            .map(|&i| (residual_norm * eig.eigenvectors[(m - 1, i)]).abs())
            .fold(0.0, f64::max);

        if worst <= threshold {
            let s = DMatrix::from_fn(m, k, |r, c| eig.eigenvectors[(r, order[c])]);
            basis.rotate(&s);
            let values: Vec<f64> = order[..k].iter().map(|&i| eig.eigenvalues[i]).collect();
            let vectors = DMatrix::from_column_slice(n, k, &basis.data[..n * k]);
            return Ok((values, vectors));
        }

        // keep the leading Ritz vectors plus a buffer, then restart from the residual
        let keep = (k + (m - k) / 2).min(m - 1);
        let s = DMatrix::from_fn(m, keep, |r, c| eig.eigenvectors[(r, order[c])]);
        basis.rotate(&s);
        t.fill(0.0);
        for c in 0..keep {
            t[(c, c)] = eig.eigenvalues[order[c]];
        }
        if residual_norm > 0.0 {
            let next = basis.col_mut(keep);
            for (d, s) in next.iter_mut().zip(&residual) {
                *d = s / residual_norm;
            }
            // guard against drift in the kept block
            let mut v = basis.col(keep).to_vec();
            basis.orthogonalize(&mut v, keep);
            let nv = norm(&v);
            v.iter_mut().for_each(|x| *x /= nv);
            basis.col_mut(keep).copy_from_slice(&v);
        } else {
            let v = random_unit_orthogonal(&basis, keep, &mut rng);
            basis.col_mut(keep).copy_from_slice(&v);
        }
        kept = keep;
    }

    Err(Error::NoConvergence {
        restarts: max_restarts,
        worst_residual: worst,
    })
}
