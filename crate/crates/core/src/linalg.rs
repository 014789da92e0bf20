//! Small dense helpers shared across modules.

use nalgebra::DMatrix;

/// Relative singular-value threshold used for every numerical rank decision.
pub const RANK_RTOL: f64 = 1e-10;

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numerical rank: number of singular values above `RANK_RTOL * sigma_max`.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let s = singular_values(m);
    match s.first() {
        None | Some(0.0) => 0,
        Some(&top) => s.iter().filter(|&&v| v > RANK_RTOL * top).count(),
    }
}

/// Lower empirical quantile: the smallest sample value whose empirical CDF is at least `level`.
///
/// `level * len` is nudged down by 1e-9 before the ceiling so that levels such as
/// `1 - 0.95` do not pick up a spurious extra rank from binary rounding.
pub fn lower_quantile(values: &[f64], level: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of an empty sample");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let rank = (level * sorted.len() as f64 - 1e-9).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

pub fn max_entry(m: &DMatrix<f64>) -> f64 {
    m.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

pub fn max_abs_entry(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// Copies the listed rows of `m` into a new matrix, preserving order.
pub fn select_rows(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), m.ncols(), |i, j| m[(rows[i], j)])
}

/// All permutations of `0..k` in lexicographic order.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..k).collect();
    loop {
        out.push(current.clone());
        // next lexicographic permutation
        let Some(i) = (0..k.saturating_sub(1)).rev().find(|&i| current[i] < current[i + 1]) else {
            break;
        };
        let j = (i + 1..k).rev().find(|&j| current[j] > current[i]).unwrap();
        current.swap(i, j);
        current[i + 1..].reverse();
    }
    out
}
