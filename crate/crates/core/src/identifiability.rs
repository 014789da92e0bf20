//! Identifiability of `(Theta, B)` from `P = rho Theta B Theta^T`, with explicit
//! counterexamples whenever a model is not identifiable.
//!
//! With one pure node per community the model is identifiable when `B` has
//! full rank, or rank `K - 1` with no row of `B` an affine combination of the
//! others. Otherwise a node with positive membership in every community can be
//! moved along the null directions of `B` without changing `P`. A community
//! without any pure node can be shrunk by a linear change of coordinates `M`
//! that keeps every row stochastic and every probability in range.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::numerical_rank;
use crate::metrics::align_columns;
use crate::model::MembershipMatrix;

/// `|W^T 1 - 1|` at or below this counts as an affine combination.
pub const AFFINE_TOL: f64 = 1e-9;

/// A witness must move `Theta` at least this far from every column permutation.
pub const MIN_WITNESS_DISTANCE: f64 = 1e-6;

/// Largest relative change of `P` tolerated in a witness.
pub const WITNESS_P_RTOL: f64 = 1e-8;

const MAX_HALVINGS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdentifiabilityStatus {
    Identifiable,
    NotIdentifiable,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictReason {
    /// `rank(B) = K`.
    FullRank,
    /// `rank(B) = K - 1` and no row of `B` is an affine combination of the others.
    NoAffineRow,
    /// Rank-deficient `B` and a mixed node; witness attached.
    MixedNodeWitness,
    /// A community without pure nodes and all probabilities in `(0, 1)`; witness attached.
    NoPureNodeWitness,
    /// A community has no pure node and no witness could be built.
    PureNodeMissing,
    /// Rank-deficient `B` without the structure any clause needs.
    ClauseGap,
}

impl VerdictReason {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::FullRank => "full-rank",
            Self::NoAffineRow => "no-affine-row",
            Self::MixedNodeWitness => "mixed-node-witness",
            Self::NoPureNodeWitness => "no-pure-node-witness",
            Self::PureNodeMissing => "pure-node-missing",
            Self::ClauseGap => "clause-gap",
        }
    }
}

impl IdentifiabilityStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Identifiable => "identifiable",
            Self::NotIdentifiable => "not-identifiable",
            Self::Undetermined => "undetermined",
        }
    }
}

/// An alternative parameter pair producing the same `P`.
#[derive(Debug, Clone)]
pub struct Witness {
    pub theta: MembershipMatrix,
    /// Unnormalized; `rho * b` are the probabilities.
    pub b: DMatrix<f64>,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessCheck {
    /// `max |P' - P|`.
    pub p_max_error: f64,
    /// `||P' - P||_F / ||P||_F`.
    pub p_relative_error: f64,
    /// `min_Pi ||Theta' - Theta Pi||_F`.
    pub permutation_distance: f64,
}

impl WitnessCheck {
    pub fn is_valid(&self) -> bool {
        self.p_relative_error <= WITNESS_P_RTOL && self.permutation_distance > MIN_WITNESS_DISTANCE
    }
}

#[derive(Debug, Clone)]
pub struct IdentifiabilityVerdict {
    pub status: IdentifiabilityStatus,
    pub reason: VerdictReason,
    pub rank: usize,
    pub witness: Option<Witness>,
}

fn validate_b(theta: &MembershipMatrix, b: &DMatrix<f64>, rho: f64) -> Result<()> {
    let k = theta.k();
    if b.shape() != (k, k) {
        return Err(Error::DimensionMismatch(format!(
            "B is {}x{}, theta has {k} columns",
            b.nrows(),
            b.ncols()
        )));
    }
    if (b - b.transpose()).amax() > 1e-12 {
        return Err(Error::InvalidArgument("B is not symmetric".into()));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidArgument(format!("rho = {rho} must be positive")));
    }
    Ok(())
}

/// Communities that have no pure node, in increasing order.
pub fn communities_without_pure_node(theta: &MembershipMatrix) -> Vec<usize> {
    let mut has = vec![false; theta.k()];
    for i in 0..theta.n() {
        if let Some(c) = theta.pure_community(i) {
            has[c] = true;
        }
    }
    (0..theta.k()).filter(|&c| !has[c]).collect()
}

/// The row with every entry positive whose smallest entry is largest.
pub fn most_mixed_node(theta: &MembershipMatrix) -> Option<usize> {
    let t = theta.matrix();
    (0..theta.n())
        .map(|i| (i, t.row(i).min()))
        .filter(|&(_, m)| m > 0.0)
        .fold(None, |best: Option<(usize, f64)>, (i, m)| match best {
            Some((_, bm)) if bm >= m => best,
            _ => Some((i, m)),
        })
        .map(|(i, _)| i)
}

/// Split `B = [C, C W; W^T C, W^T C W]` over a maximal independent row set.
#[derive(Debug, Clone)]
pub struct RowDecomposition {
    /// Independent rows in pivot order.
    pub independent: Vec<usize>,
    /// Remaining rows in increasing order.
    pub dependent: Vec<usize>,
    /// `C^{-1} B[I, J]`, shape `|I| x |J|`.
    pub w: DMatrix<f64>,
}

impl RowDecomposition {
    /// `W^T 1`, one entry per dependent row.
    pub fn affine_sums(&self) -> Vec<f64> {
        self.w.column_iter().map(|c| c.sum()).collect()
    }
}

/// Pivoted QR of `B` picks `rank(B)` independent rows; the dependent rows are
/// expressed in them through `W`.
pub fn decompose_rows(b: &DMatrix<f64>) -> RowDecomposition {
    let k = b.nrows();
    let rank = numerical_rank(b);
    // column pivots of B^T are row pivots of B
    let qr = b.transpose().col_piv_qr();
    let mut order = DMatrix::from_fn(1, k, |_, j| j as f64);
    qr.p().permute_columns(&mut order);
    let pivots: Vec<usize> = order.iter().map(|&v| v as usize).collect();
    let independent = pivots[..rank].to_vec();
    let mut dependent = pivots[rank..].to_vec();
    dependent.sort_unstable();
    let c = DMatrix::from_fn(rank, rank, |a, bb| b[(independent[a], independent[bb])]);
    let bij = DMatrix::from_fn(rank, dependent.len(), |a, bb| b[(independent[a], dependent[bb])]);
    let w = if rank == 0 {
        DMatrix::zeros(0, dependent.len())
    } else {
        c.lu().solve(&bij).unwrap_or_else(|| DMatrix::zeros(rank, dependent.len()))
    };
    RowDecomposition {
        independent,
        dependent,
        w,
    }
}

/// Perturbation direction `Delta` with `Delta^T B = 0` and `1^T Delta = 0`:
/// `-W beta` on the independent rows and `beta` on the dependent rows.
fn null_direction(dec: &RowDecomposition, k: usize) -> Result<Vec<f64>> {
    let l = dec.dependent.len();
    if l == 0 {
        return Err(Error::Witness("B has full rank".into()));
    }
    let c: Vec<f64> = dec.affine_sums().iter().map(|s| 1.0 - s).collect();
    let cn = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    let beta: Vec<f64> = if cn <= AFFINE_TOL {
        let mut e = vec![0.0; l];
        e[0] = 1.0;
        e
    } else if l == 1 {
        return Err(Error::Witness(
            "rank K-1 and no row is an affine combination of the others".into(),
        ));
    } else {
        // the basis vector with the largest component orthogonal to c
        let u: Vec<f64> = c.iter().map(|v| v / cn).collect();
        let (best, _) = (0..l)
            .map(|j| (j, 1.0 - u[j] * u[j]))
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        let mut e: Vec<f64> = u.iter().map(|uj| -u[best] * uj).collect();
        e[best] += 1.0;
        let en = e.iter().map(|v| v * v).sum::<f64>().sqrt();
        e.iter().map(|v| v / en).collect()
    };
    let mut delta = vec![0.0; k];
    for (a, &i) in dec.independent.iter().enumerate() {
        delta[i] = -(0..l).map(|j| dec.w[(a, j)] * beta[j]).sum::<f64>();
    }
    for (j, &d) in dec.dependent.iter().enumerate() {
        delta[d] = beta[j];
    }
    Ok(delta)
}

/// Largest step along `delta` keeping row `m` strictly inside the simplex.
fn max_step(row: &[f64], delta: &[f64]) -> f64 {
    row.iter()
        .zip(delta)
        .filter(|(_, d)| **d < 0.0)
        .map(|(t, d)| t / -d)
        .fold(f64::INFINITY, f64::min)
}

/// Moves the most mixed node along a null direction of `B` by `epsilon`.
pub fn construct_mixed_witness(
    theta: &MembershipMatrix,
    b: &DMatrix<f64>,
    rho: f64,
    epsilon: f64,
) -> Result<Witness> {
    validate_b(theta, b, rho)?;
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::Witness(format!("epsilon = {epsilon} must be nonnegative")));
    }
    let m = most_mixed_node(theta).ok_or_else(|| Error::Witness("no mixed node".into()))?;
    let delta = null_direction(&decompose_rows(b), theta.k())?;
    let row: Vec<f64> = theta.matrix().row(m).iter().copied().collect();
    if epsilon >= max_step(&row, &delta) {
        return Err(Error::Witness(format!(
            "epsilon = {epsilon} moves node {m} out of the open simplex"
        )));
    }
    let mut t = theta.matrix().clone();
    for (j, d) in delta.iter().enumerate() {
        t[(m, j)] += epsilon * d;
    }
    Ok(Witness {
        theta: MembershipMatrix::new(t)?,
        b: b.clone(),
        epsilon,
    })
}

/// Half the largest admissible step of the mixed node.
pub fn default_mixed_epsilon(theta: &MembershipMatrix, b: &DMatrix<f64>) -> Result<f64> {
    let m = most_mixed_node(theta).ok_or_else(|| Error::Witness("no mixed node".into()))?;
    let delta = null_direction(&decompose_rows(b), theta.k())?;
    let row: Vec<f64> = theta.matrix().row(m).iter().copied().collect();
    let step = max_step(&row, &delta);
    Ok(if step.is_finite() { 0.5 * step } else { 0.5 })
}

/// The mixing matrix for community `c`: `1 + (K-1) eps^2` on its diagonal,
/// `-eps^2` elsewhere in its row, zero elsewhere in its column, and
/// `eps 1 1^T + (1 - (K-1) eps) I` on the remaining block. Rows sum to one.
pub fn no_pure_mixing_matrix(k: usize, c: usize, epsilon: f64) -> DMatrix<f64> {
    let e2 = epsilon * epsilon;
    let km1 = (k - 1) as f64;
    DMatrix::from_fn(k, k, |i, j| match (i == c, j == c) {
        (true, true) => 1.0 + km1 * e2,
        (true, false) => -e2,
        (false, true) => 0.0,
        (false, false) => epsilon + if i == j { 1.0 - km1 * epsilon } else { 0.0 },
    })
}

/// `1 - max_i theta_ic` for a community `c` without pure nodes.
pub fn pure_gap(theta: &MembershipMatrix, c: usize) -> f64 {
    1.0 - theta.matrix().column(c).max()
}

/// `Theta_2 = Theta M`, `B_2 = M^{-1} B M^{-T}` for the first community lacking a pure node.
///
/// Every `epsilon` below [`pure_gap`] keeps `Theta_2` nonnegative; larger values
/// are accepted when `Theta_2` and `rho B_2` still satisfy their constraints.
pub fn construct_no_pure_witness(
    theta: &MembershipMatrix,
    b: &DMatrix<f64>,
    rho: f64,
    epsilon: f64,
) -> Result<Witness> {
    validate_b(theta, b, rho)?;
    let k = theta.k();
    let c = *communities_without_pure_node(theta)
        .first()
        .ok_or_else(|| Error::Witness("every community has a pure node".into()))?;
    if !(epsilon > 0.0 && (k < 3 || epsilon < 1.0 / (k - 1) as f64)) {
        return Err(Error::Witness(format!(
            "epsilon = {epsilon} must lie in (0, 1/(K-1)) for the mixing matrix to be invertible"
        )));
    }
    if b.iter().any(|&v| !(rho * v > 0.0 && rho * v < 1.0)) {
        return Err(Error::Witness("rho B has an entry outside (0, 1)".into()));
    }
    let m = no_pure_mixing_matrix(k, c, epsilon);
    let m_inv = m
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Witness(format!("mixing matrix is singular at epsilon = {epsilon}")))?;
    let mut t2 = theta.matrix() * &m;
    // nonnegative whenever epsilon is below the pure gap; larger steps must be checked
    if let Some(v) = t2.iter().find(|&&v| v < -1e-15) {
        return Err(Error::Witness(format!(
            "Theta M has entry {v:.3e} at epsilon = {epsilon}"
        )));
    }
    t2.iter_mut().filter(|v| **v < 0.0).for_each(|v| *v = 0.0);
    let mut b2 = &m_inv * b * m_inv.transpose();
    crate::linalg::symmetrize(&mut b2);
    if let Some(v) = b2.iter().find(|&&v| !(rho * v > 0.0 && rho * v < 1.0)) {
        return Err(Error::Witness(format!(
            "rho B_2 entry {:.3e} leaves (0, 1) at epsilon = {epsilon}",
            rho * v
        )));
    }
    Ok(Witness {
        theta: MembershipMatrix::new(t2)?,
        b: b2,
        epsilon,
    })
}

/// Largest admissible `epsilon` of the form `2^-j / max(1, K-1)`, `j >= 1`.
///
/// The change to `Theta` is of order `epsilon^2` when `K = 2`, so starting from
/// the pure gap alone can leave the witness numerically indistinguishable.
pub fn construct_no_pure_witness_auto(theta: &MembershipMatrix, b: &DMatrix<f64>, rho: f64) -> Result<Witness> {
    if communities_without_pure_node(theta).is_empty() {
        return Err(Error::Witness("every community has a pure node".into()));
    }
    let mut epsilon = 0.5 / (theta.k().max(2) - 1) as f64;
    let mut last = Error::Witness("no admissible epsilon".into());
    for _ in 0..=MAX_HALVINGS {
        match construct_no_pure_witness(theta, b, rho, epsilon) {
            Ok(w) => return Ok(w),
            Err(e) => last = e,
        }
        epsilon *= 0.5;
    }
    Err(last)
}

/// `rho Theta B Theta^T` via the `K`-column factors.
fn population(theta: &DMatrix<f64>, b: &DMatrix<f64>, rho: f64) -> DMatrix<f64> {
    theta * (b * rho) * theta.transpose()
}

/// Recomputes both probability matrices and the distance to every relabeling.
pub fn verify_witness(theta: &MembershipMatrix, b: &DMatrix<f64>, rho: f64, witness: &Witness) -> Result<WitnessCheck> {
    let p = population(theta.matrix(), b, rho);
    let p2 = population(witness.theta.matrix(), &witness.b, rho);
    let diff = &p2 - &p;
    let scale = p.norm();
    let p_relative_error = if scale > 0.0 { diff.norm() / scale } else { diff.norm() };
    let aligned = align_columns(witness.theta.matrix(), theta.matrix())?;
    Ok(WitnessCheck {
        p_max_error: diff.amax(),
        p_relative_error,
        permutation_distance: aligned.cost,
    })
}

fn verdict(status: IdentifiabilityStatus, reason: VerdictReason, rank: usize, witness: Option<Witness>) -> IdentifiabilityVerdict {
    IdentifiabilityVerdict {
        status,
        reason,
        rank,
        witness,
    }
}

/// Classifies `(Theta, B, rho)`. Every not-identifiable verdict carries a
/// witness that passed [`verify_witness`].
pub fn check_identifiability(theta: &MembershipMatrix, b: &DMatrix<f64>, rho: f64) -> Result<IdentifiabilityVerdict> {
    use IdentifiabilityStatus::*;
    use VerdictReason::*;
    validate_b(theta, b, rho)?;
    let k = theta.k();
    let rank = numerical_rank(b);
    let verified = |w: Witness| -> Result<Option<Witness>> {
        let check = verify_witness(theta, b, rho, &w)?;
        Ok(check.is_valid().then_some(w))
    };

    if !communities_without_pure_node(theta).is_empty() {
        let witness = match construct_no_pure_witness_auto(theta, b, rho) {
            Ok(w) => verified(w)?,
            Err(_) => None,
        };
        return Ok(match witness {
            Some(w) => verdict(NotIdentifiable, NoPureNodeWitness, rank, Some(w)),
            None => verdict(Undetermined, PureNodeMissing, rank, None),
        });
    }
    if rank == k {
        return Ok(verdict(Identifiable, FullRank, rank, None));
    }
    if rank + 1 == k {
        let sums = decompose_rows(b).affine_sums();
        if (sums[0] - 1.0).abs() > AFFINE_TOL {
            return Ok(verdict(Identifiable, NoAffineRow, rank, None));
        }
    }
    let witness = match (most_mixed_node(theta), default_mixed_epsilon(theta, b)) {
        (Some(_), Ok(eps)) => match construct_mixed_witness(theta, b, rho, eps) {
            Ok(w) => verified(w)?,
            Err(_) => None,
        },
        _ => None,
    };
    Ok(match witness {
        Some(w) => verdict(NotIdentifiable, MixedNodeWitness, rank, Some(w)),
        None => verdict(Undetermined, ClauseGap, rank, None),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pure_plus_mixed(k: usize, mixed: &[Vec<f64>]) -> MembershipMatrix {
        let n = k + mixed.len();
        let t = DMatrix::from_fn(n, k, |i, j| {
            if i < k {
                if i == j {
                    1.0
                } else {
                    0.0
                }
            } else {
                mixed[i - k][j]
            }
        });
        MembershipMatrix::new(t).unwrap()
    }

    #[test]
    fn identity_b_is_identifiable() {
        let theta = pure_plus_mixed(3, &[vec![0.2, 0.3, 0.5]]);
        let v = check_identifiability(&theta, &DMatrix::identity(3, 3), 0.5).unwrap();
        assert_eq!(v.status, IdentifiabilityStatus::Identifiable);
        assert_eq!(v.reason, VerdictReason::FullRank);
    }

    fn affine_b() -> DMatrix<f64> {
        // third row is the midpoint of the first two
        let r1 = [1.0, 0.2, 0.6];
        let r2 = [0.2, 0.8, 0.5];
        let r3 = [0.6, 0.5, 0.55];
        DMatrix::from_row_slice(3, 3, &[r1, r2, r3].concat())
    }

    #[test]
    fn affine_row_with_mixed_node_has_witness() {
        let b = affine_b();
        assert_eq!(numerical_rank(&b), 2);
        let theta = pure_plus_mixed(3, &[vec![0.2, 0.3, 0.5], vec![0.6, 0.2, 0.2]]);
        let v = check_identifiability(&theta, &b, 0.4).unwrap();
        assert_eq!(v.status, IdentifiabilityStatus::NotIdentifiable);
        assert_eq!(v.reason, VerdictReason::MixedNodeWitness);
        let w = v.witness.unwrap();
        let check = verify_witness(&theta, &b, 0.4, &w).unwrap();
        assert!(check.p_max_error <= 1e-10);
        assert!(check.permutation_distance > 1e-6);
    }

    #[test]
    fn affine_row_without_mixed_node_is_a_gap() {
        let theta = pure_plus_mixed(3, &[vec![0.5, 0.5, 0.0]]);
        let v = check_identifiability(&theta, &affine_b(), 0.4).unwrap();
        assert_eq!(v.status, IdentifiabilityStatus::Undetermined);
        assert_eq!(v.reason, VerdictReason::ClauseGap);
    }

    #[test]
    fn non_affine_rank_deficient_b_is_identifiable() {
        // third row = 0.5 r1 + 0.3 r2, weights sum to 0.8
        let r1 = DMatrix::from_row_slice(1, 3, &[1.0, 0.2, 0.56]);
        let r2 = DMatrix::from_row_slice(1, 3, &[0.2, 0.8, 0.34]);
        let r3 = &r1 * 0.5 + &r2 * 0.3;
        let b = DMatrix::from_rows(&[r1.row(0).into_owned(), r2.row(0).into_owned(), r3.row(0).into_owned()]);
        assert!((&b - b.transpose()).amax() < 1e-12);
        let theta = pure_plus_mixed(3, &[vec![0.2, 0.3, 0.5]]);
        let v = check_identifiability(&theta, &b, 0.4).unwrap();
        assert_eq!(v.status, IdentifiabilityStatus::Identifiable);
        assert_eq!(v.reason, VerdictReason::NoAffineRow);
    }

    #[test]
    fn zero_epsilon_leaves_theta_unchanged() {
        let theta = pure_plus_mixed(3, &[vec![0.2, 0.3, 0.5]]);
        let w = construct_mixed_witness(&theta, &affine_b(), 0.4, 0.0).unwrap();
        assert_eq!(w.theta.matrix(), theta.matrix());
    }

    #[test]
    fn oversized_epsilon_rejected() {
        let theta = pure_plus_mixed(3, &[vec![0.2, 0.3, 0.5]]);
        assert!(construct_mixed_witness(&theta, &affine_b(), 0.4, 10.0).is_err());
    }

    #[test]
    fn mixing_matrix_rows_sum_to_one() {
        let m = no_pure_mixing_matrix(3, 0, 0.01);
        for i in 0..3 {
            assert!((m.row(i).sum() - 1.0).abs() < 1e-15);
        }
        let m = no_pure_mixing_matrix(4, 2, 0.1);
        for i in 0..4 {
            assert!((m.row(i).sum() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn no_pure_witness_lower_bound() {
        // community 0 has no pure node and max theta_i0 = 0.8, so delta = 0.2
        let t = DMatrix::from_row_slice(
            5,
            3,
            &[0.8, 0.2, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.3, 0.3, 0.4, 0.5, 0.0, 0.5],
        );
        let theta = MembershipMatrix::new(t).unwrap();
        let b = DMatrix::from_row_slice(3, 3, &[0.6, 0.3, 0.2, 0.3, 0.7, 0.25, 0.2, 0.25, 0.5]);
        let (delta, eps) = (0.2, 0.1);
        let w = construct_no_pure_witness(&theta, &b, 1.0, eps).unwrap();
        let t2 = w.theta.matrix();
        for i in 0..5 {
            for j in 1..3 {
                assert!(t2[(i, j)] >= eps * delta * delta - 1e-15);
            }
        }
        let check = verify_witness(&theta, &b, 1.0, &w).unwrap();
        assert!(check.p_max_error <= 1e-10);
        assert!(check.permutation_distance > 1e-6);
    }

    #[test]
    fn small_pure_gap_still_gives_distinct_witness() {
        // max theta_i0 = 0.9995, so every epsilon below the gap moves Theta by < 1e-6
        let t = DMatrix::from_row_slice(3, 2, &[0.9995, 0.0005, 0.2, 0.8, 0.0, 1.0]);
        let theta = MembershipMatrix::new(t).unwrap();
        let b = DMatrix::from_row_slice(2, 2, &[0.7, 0.15, 0.15, 1.0]);
        let v = check_identifiability(&theta, &b, 0.3).unwrap();
        assert_eq!(v.reason, VerdictReason::NoPureNodeWitness);
        let w = v.witness.unwrap();
        assert!(w.epsilon > pure_gap(&theta, 0));
        assert!(w.theta.matrix().iter().all(|&x| x >= 0.0));
        assert!(verify_witness(&theta, &b, 0.3, &w).unwrap().is_valid());
    }

    #[test]
    fn large_epsilon_rejected_when_theta_goes_negative() {
        let t = DMatrix::from_row_slice(3, 2, &[0.9995, 0.0005, 0.2, 0.8, 0.0, 1.0]);
        let theta = MembershipMatrix::new(t).unwrap();
        let b = DMatrix::from_row_slice(2, 2, &[0.7, 0.15, 0.15, 1.0]);
        assert!(matches!(construct_no_pure_witness(&theta, &b, 0.3, 0.5), Err(Error::Witness(_))));
    }

    #[test]
    fn no_pure_b_converges_as_epsilon_shrinks() {
        let t = DMatrix::from_row_slice(4, 3, &[0.7, 0.3, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.3, 0.3, 0.4]);
        let theta = MembershipMatrix::new(t).unwrap();
        let b = DMatrix::from_row_slice(3, 3, &[0.6, 0.3, 0.2, 0.3, 0.7, 0.25, 0.2, 0.25, 0.5]);
        let dist: Vec<f64> = [0.1, 0.01, 0.001]
            .iter()
            .map(|&e| (construct_no_pure_witness(&theta, &b, 1.0, e).unwrap().b - &b).norm())
            .collect();
        assert!(dist[0] > dist[1] && dist[1] > dist[2]);
    }

    #[test]
    fn missing_pure_node_gives_witness_verdict() {
        let t = DMatrix::from_row_slice(4, 3, &[0.7, 0.3, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.3, 0.3, 0.4]);
        let theta = MembershipMatrix::new(t).unwrap();
        let b = DMatrix::from_row_slice(3, 3, &[0.6, 0.3, 0.2, 0.3, 0.7, 0.25, 0.2, 0.25, 0.5]);
        let v = check_identifiability(&theta, &b, 1.0).unwrap();
        assert_eq!(v.status, IdentifiabilityStatus::NotIdentifiable);
        assert_eq!(v.reason, VerdictReason::NoPureNodeWitness);
        // an entry of rho B at 1 blocks the construction
        let v = check_identifiability(&theta, &DMatrix::identity(3, 3), 1.0).unwrap();
        assert_eq!(v.status, IdentifiabilityStatus::Undetermined);
        assert_eq!(v.reason, VerdictReason::PureNodeMissing);
    }

    #[test]
    fn decomposition_reconstructs_dependent_rows() {
        let b = affine_b();
        let dec = decompose_rows(&b);
        assert_eq!(dec.independent.len(), 2);
        for (j, &d) in dec.dependent.iter().enumerate() {
            for col in 0..3 {
                let rebuilt: f64 = dec
                    .independent
                    .iter()
                    .enumerate()
                    .map(|(a, &i)| dec.w[(a, j)] * b[(i, col)])
                    .sum();
                assert!((rebuilt - b[(d, col)]).abs() < 1e-12);
            }
        }
        assert!((dec.affine_sums()[0] - 1.0).abs() < 1e-12);
    }
}
