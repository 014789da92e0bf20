//! Model parameters, membership matrices and assumption checks.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;

/// Parameters `(n, K, alpha, B, rho)` of a mixed membership stochastic blockmodel.
///
/// `B` is symmetric with entries in `[0, 1]` and maximum exactly 1; the overall
/// edge density lives in `rho`. Use [`ModelParams::normalized`] to fold an
/// arbitrary nonnegative `B` into this form.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    n: usize,
    alpha: Vec<f64>,
    b: DMatrix<f64>,
    rho: f64,
}

const SYMMETRY_TOL: f64 = 1e-12;

impl ModelParams {
    /// Strict constructor: rejects a `B` whose maximum entry is not 1.
    pub fn new(n: usize, alpha: Vec<f64>, b: DMatrix<f64>, rho: f64) -> Result<Self> {
        let params = Self::checked(n, alpha, b, rho)?;
        let max_b = linalg::max_entry(&params.b);
        if (max_b - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!(
                "max entry of B is {max_b}, expected 1 (use ModelParams::normalized)"
            )));
        }
        Ok(params)
    }

    /// Rescales `(B, rho)` jointly so that `max B = 1` while `rho * B` is unchanged.
    pub fn normalized(n: usize, alpha: Vec<f64>, b: DMatrix<f64>, rho: f64) -> Result<Self> {
        let mut params = Self::checked(n, alpha, b, rho)?;
        let max_b = linalg::max_entry(&params.b);
        if max_b != 1.0 {
            params.b /= max_b;
            params.rho *= max_b;
            let k = params.k();
            for i in 0..k {
                params.b[(i, i)] = params.b[(i, i)].min(1.0);
            }
        }
        if !(params.rho > 0.0 && params.rho <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "rho * max(B) = {} is outside (0, 1]",
                params.rho
            )));
        }
        Ok(params)
    }

    fn checked(n: usize, alpha: Vec<f64>, mut b: DMatrix<f64>, rho: f64) -> Result<Self> {
        let k = alpha.len();
        if n == 0 {
            return Err(Error::InvalidParams("n must be positive".into()));
        }
        if k == 0 {
            return Err(Error::InvalidParams("need at least one community".into()));
        }
        if let Some(a) = alpha.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::InvalidParams(format!("alpha entries must be positive, got {a}")));
        }
        if b.nrows() != k || b.ncols() != k {
            return Err(Error::InvalidParams(format!(
                "B is {}x{}, expected {k}x{k}",
                b.nrows(),
                b.ncols()
            )));
        }
        for i in 0..k {
            for j in 0..k {
                let v = b[(i, j)];
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::InvalidParams(format!("B[{i},{j}] = {v} is not a nonnegative number")));
                }
                if (v - b[(j, i)]).abs() > SYMMETRY_TOL {
                    return Err(Error::InvalidParams(format!("B is not symmetric at ({i},{j})")));
                }
            }
        }
        linalg::symmetrize(&mut b);
        if linalg::max_entry(&b) <= 0.0 {
            return Err(Error::InvalidParams("B must have a positive entry".into()));
        }
        if !(rho.is_finite() && rho > 0.0 && rho <= 1.0) {
            return Err(Error::InvalidParams(format!("rho = {rho} is outside (0, 1]")));
        }
        Ok(Self { n, alpha, b, rho })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha.iter().sum()
    }

    pub fn alpha_min(&self) -> f64 {
        self.alpha.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn alpha_max(&self) -> f64 {
        self.alpha.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `alpha0 / alpha_min`.
    pub fn nu(&self) -> f64 {
        self.alpha0() / self.alpha_min()
    }

    /// The community link probability matrix `rho * B`.
    pub fn scaled_b(&self) -> DMatrix<f64> {
        &self.b * self.rho
    }

    /// Same parameters with a different node count.
    pub fn with_n(&self, n: usize) -> Self {
        Self { n, ..self.clone() }
    }
}

/// Row-stochastic `n x K` membership matrix.
///
/// Rows sum to one within `1e-12`. All-zero rows are allowed and flagged as
/// zeroed; they arise when estimation thresholding removes every entry.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipMatrix {
    theta: DMatrix<f64>,
    pure_rows: Vec<usize>,
    zeroed: Vec<bool>,
}

pub const ROW_SUM_TOL: f64 = 1e-12;

impl MembershipMatrix {
    pub fn new(theta: DMatrix<f64>) -> Result<Self> {
        let mut zeroed = vec![false; theta.nrows()];
        for (i, row) in theta.row_iter().enumerate() {
            if row.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::InvalidArgument(format!("membership row {i} has a negative or non-finite entry")));
            }
            let sum: f64 = row.iter().sum();
            if sum == 0.0 {
                zeroed[i] = true;
            } else if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidArgument(format!("membership row {i} sums to {sum}")));
            }
        }
        Ok(Self {
            theta,
            pure_rows: Vec::new(),
            zeroed,
        })
    }

    /// Divides each nonzero row by its sum; all-zero rows stay zero and are flagged.
    pub fn from_unnormalized(mut raw: DMatrix<f64>) -> Result<Self> {
        for mut row in raw.row_iter_mut() {
            let sum: f64 = row.iter().sum();
            if sum > 0.0 {
                row /= sum;
            }
        }
        Self::new(raw)
    }

    /// Marks rows as pure. Each must be a standard basis vector.
    pub fn with_pure_rows(mut self, rows: Vec<usize>) -> Result<Self> {
        for &r in &rows {
            if r >= self.n() {
                return Err(Error::InvalidArgument(format!("pure row {r} out of range")));
            }
            let row = self.theta.row(r);
            let ones = row.iter().filter(|&&v| v == 1.0).count();
            let zeros = row.iter().filter(|&&v| v == 0.0).count();
            if ones != 1 || zeros != self.k() - 1 {
                return Err(Error::InvalidArgument(format!("row {r} is not a standard basis vector")));
            }
        }
        self.pure_rows = rows;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.theta.nrows()
    }

    pub fn k(&self) -> usize {
        self.theta.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.theta
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.theta
    }

    pub fn pure_rows(&self) -> &[usize] {
        &self.pure_rows
    }

    pub fn zeroed(&self) -> &[bool] {
        &self.zeroed
    }

    pub fn zeroed_count(&self) -> usize {
        self.zeroed.iter().filter(|z| **z).count()
    }

    /// The community of row `i` when it is a standard basis vector.
    pub fn pure_community(&self, i: usize) -> Option<usize> {
        let row = self.theta.row(i);
        let mut found = None;
        for (j, &v) in row.iter().enumerate() {
            if v == 1.0 && found.is_none() {
                found = Some(j);
            } else if v != 0.0 {
                return None;
            }
        }
        found
    }

    /// Returns a copy with columns reordered: new column `j` is old column `perm[j]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Self {
        let theta = DMatrix::from_fn(self.n(), self.k(), |i, j| self.theta[(i, perm[j])]);
        Self {
            theta,
            pure_rows: self.pure_rows.clone(),
            zeroed: self.zeroed.clone(),
        }
    }
}

/// Dense symmetric matrix, e.g. the population matrix `P = rho Theta B Theta^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSymmetricMatrix {
    data: DMatrix<f64>,
}

impl DenseSymmetricMatrix {
    pub fn new(mut data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, expected square",
                data.nrows(),
                data.ncols()
            )));
        }
        let n = data.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                if (data[(i, j)] - data[(j, i)]).abs() > SYMMETRY_TOL {
                    return Err(Error::InvalidArgument(format!("matrix is not symmetric at ({i},{j})")));
                }
            }
        }
        linalg::symmetrize(&mut data);
        Ok(Self { data })
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }
}

/// One side-by-side inequality evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `"<="` or `">="`: the relation that must hold between `lhs` and `rhs`.
    pub relation: &'static str,
    pub satisfied: bool,
}

impl InequalityCheck {
    fn le(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            relation: "<=",
            satisfied: lhs <= rhs,
        }
    }

    fn ge(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            relation: ">=",
            satisfied: lhs >= rhs,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RankCheck {
    pub rank: usize,
    pub k: usize,
    pub smallest_singular_value: f64,
    pub threshold: f64,
    pub satisfied: bool,
}

/// Feasibility of the model conditions under which consistent recovery is guaranteed.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    pub xi: f64,
    /// `nu <= min(sqrt(n / (27 log n)), n rho) / (2 (1 + alpha0))`
    pub nu_bound: InequalityCheck,
    /// `lambda*(B) / nu >= 8 (1 + alpha0) (log n)^xi / sqrt(n rho)`
    pub separation: InequalityCheck,
    /// `rank(B) = K`
    pub full_rank: RankCheck,
    /// `lambda*(B) >= K^3 nu^2.5 (1 + alpha0)^1.5 (log n)^xi / sqrt(n rho)`
    pub corner_recovery: InequalityCheck,
    pub convention: &'static str,
}

impl AssumptionReport {
    pub fn all_satisfied(&self) -> bool {
        self.nu_bound.satisfied && self.separation.satisfied && self.full_rank.satisfied && self.corner_recovery.satisfied
    }
}

pub const DEFAULT_XI: f64 = 1.5;

/// Evaluates both sides of each model condition. Never fails on a violated condition.
///
/// The order-notation condition on corner recovery is evaluated with constant 1
/// and its hidden logarithmic factor taken as `(log n)^xi`.
pub fn validate_assumptions(params: &ModelParams, xi: f64) -> AssumptionReport {
    let n = params.n() as f64;
    let k = params.k() as f64;
    let rho = params.rho();
    let alpha0 = params.alpha0();
    let nu = params.nu();
    let log_n = n.ln();
    let sqrt_n_rho = (n * rho).sqrt();

    let sv = linalg::singular_values(params.b());
    let lambda_star = sv[params.k() - 1];
    let sigma_max = sv[0];
    let threshold = linalg::RANK_RTOL * sigma_max;
    let rank = sv.iter().filter(|&&s| s > threshold).count();

    let nu_rhs = (n / (27.0 * log_n)).sqrt().min(n * rho) / (2.0 * (1.0 + alpha0));
    let sep_rhs = 8.0 * (1.0 + alpha0) * log_n.powf(xi) / sqrt_n_rho;
    let spa_rhs = k.powi(3) * nu.powf(2.5) * (1.0 + alpha0).powf(1.5) * log_n.powf(xi) / sqrt_n_rho;

    AssumptionReport {
        xi,
        nu_bound: InequalityCheck::le(nu, nu_rhs),
        separation: InequalityCheck::ge(lambda_star / nu, sep_rhs),
        full_rank: RankCheck {
            rank,
            k: params.k(),
            smallest_singular_value: lambda_star,
            threshold,
            satisfied: rank == params.k(),
        },
        corner_recovery: InequalityCheck::ge(lambda_star, spa_rhs),
        convention: "order constants set to 1; logarithmic factors taken as (ln n)^xi",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn offdiag(k: usize, diag: f64, off: f64) -> DMatrix<f64> {
        DMatrix::from_fn(k, k, |i, j| if i == j { diag } else { off })
    }

    #[test]
    fn normalization_preserves_scaled_b() {
        let b = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.1, 0.25]);
        let p = ModelParams::normalized(10, vec![1.0, 1.0], b.clone(), 0.4).unwrap();
        assert_eq!(linalg::max_entry(p.b()), 1.0);
        let before = &b * 0.4;
        assert!((p.scaled_b() - before).abs().max() <= 1e-12);
        assert!((p.rho() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn strict_constructor_rejects_unnormalized_b() {
        let b = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.1, 0.25]);
        assert!(ModelParams::new(10, vec![1.0, 1.0], b, 0.4).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        let b = offdiag(2, 1.0, 0.1);
        assert!(ModelParams::new(10, vec![1.0, 0.0], b.clone(), 0.5).is_err());
        assert!(ModelParams::new(10, vec![1.0, 1.0], b.clone(), 0.0).is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.1, 1.0]);
        assert!(ModelParams::new(10, vec![1.0, 1.0], asym, 0.5).is_err());
        // rho * max(B) above one
        let big = offdiag(2, 4.0, 0.1);
        assert!(ModelParams::normalized(10, vec![1.0, 1.0], big, 0.5).is_err());
    }

    #[test]
    fn derived_alpha_quantities() {
        let p = ModelParams::new(100, vec![0.2, 0.3, 0.5], offdiag(3, 1.0, 0.0), 0.1).unwrap();
        assert!((p.alpha0() - 1.0).abs() < 1e-15);
        assert_eq!(p.alpha_min(), 0.2);
        assert_eq!(p.alpha_max(), 0.5);
        assert!((p.nu() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn membership_rows_validated() {
        let ok = DMatrix::from_row_slice(2, 2, &[0.25, 0.75, 0.0, 0.0]);
        let m = MembershipMatrix::new(ok).unwrap();
        assert_eq!(m.zeroed(), &[false, true]);
        let bad = DMatrix::from_row_slice(1, 2, &[0.5, 0.6]);
        assert!(MembershipMatrix::new(bad).is_err());
        let neg = DMatrix::from_row_slice(1, 2, &[1.5, -0.5]);
        assert!(MembershipMatrix::new(neg).is_err());
    }

    #[test]
    fn pure_rows_must_be_basis_vectors() {
        let theta = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.5, 0.5, 0.0, 1.0]);
        let m = MembershipMatrix::new(theta).unwrap();
        assert!(m.clone().with_pure_rows(vec![0, 2]).is_ok());
        assert!(m.clone().with_pure_rows(vec![1]).is_err());
        assert_eq!(m.pure_community(2), Some(1));
        assert_eq!(m.pure_community(1), None);
    }

    #[test]
    fn first_sweep_model_has_full_rank_b() {
        let p = ModelParams::new(5000, vec![1.0 / 3.0; 3], offdiag(3, 1.0, 0.05), 0.2).unwrap();
        let r = validate_assumptions(&p, DEFAULT_XI);
        assert!(r.full_rank.satisfied);
        assert_eq!(r.full_rank.rank, 3);
    }

    #[test]
    fn single_community_report_is_finite() {
        let p = ModelParams::new(1000, vec![1.0], DMatrix::from_element(1, 1, 1.0), 0.3).unwrap();
        let r = validate_assumptions(&p, DEFAULT_XI);
        assert_eq!(p.nu(), 1.0);
        assert_eq!(r.full_rank.smallest_singular_value, 1.0);
        assert!(r.full_rank.satisfied);
        for c in [&r.nu_bound, &r.separation, &r.corner_recovery] {
            assert!(c.lhs.is_finite() && c.rhs.is_finite());
        }
    }

    #[test]
    fn sparse_fig1_sides_match_plug_in_recomputation() {
        // Independent recomputation of each side from the raw formulas.
        let (n, rho, alpha0, amin, xi) = (5000.0_f64, 0.007_f64, 1.0_f64, 1.0_f64 / 3.0, 1.5_f64);
        let b = DMatrix::from_fn(3, 3, |i, j| if i == j { 1.0 } else { 0.001 });
        let p = ModelParams::new(5000, vec![1.0 / 3.0; 3], b, rho).unwrap();
        let r = validate_assumptions(&p, xi);
        let nu = alpha0 / amin;
        let lam = 1.0 - 0.001; // eigenvalues of (1-q)I + q11^T are 1-q (x2) and 1+2q
        let ln = n.ln();
        let nu_rhs = f64::min((n / (27.0 * ln)).sqrt(), n * rho) / (2.0 * (1.0 + alpha0));
        let sep_rhs = 8.0 * (1.0 + alpha0) * ln.powf(xi) / (n * rho).sqrt();
        let spa_rhs = 27.0 * nu.powf(2.5) * (1.0 + alpha0).powf(1.5) * ln.powf(xi) / (n * rho).sqrt();
        assert!((r.nu_bound.lhs - 3.0).abs() < 1e-12);
        assert!((r.nu_bound.rhs - nu_rhs).abs() < 1e-12);
        assert!((r.separation.lhs - lam / 3.0).abs() < 1e-12);
        assert!((r.separation.rhs - sep_rhs).abs() < 1e-12);
        assert!((r.corner_recovery.lhs - lam).abs() < 1e-12);
        assert!((r.corner_recovery.rhs - spa_rhs).abs() < 1e-9);
        // at this sparsity the separation condition fails
        assert!(!r.separation.satisfied);
        assert!(!r.nu_bound.satisfied);
    }
}
