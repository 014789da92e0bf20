//! Grouping of eigenvalues into intervals of increasing gap width.
//!
//! Within each sign class, eigenvalue magnitudes are scanned in increasing order.
//! The first interval opens at the smallest magnitude with gap width equal to that
//! magnitude. A new interval opens whenever the distance to the next magnitude
//! strictly exceeds the current gap width, and that distance becomes the new
//! width. Distances equal to the current width stay inside the interval.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EigenInterval {
    /// Gap width `g_k`.
    pub gap: f64,
    /// Indices into the input slice, in increasing magnitude order.
    pub members: Vec<usize>,
    /// Smallest and largest magnitude in the interval.
    pub smallest: f64,
    pub largest: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenIntervalPartition {
    /// Intervals of the positive eigenvalues, by increasing magnitude.
    pub positive: Vec<EigenInterval>,
    /// Intervals of the negative eigenvalues, on absolute values.
    pub negative: Vec<EigenInterval>,
}

impl EigenIntervalPartition {
    /// `largest_k <= (n_1 + ... + n_k) g_k` for every interval of both classes,
    /// with a relative slack of 1e-12 for rounding.
    pub fn satisfies_interval_bound(&self) -> bool {
        [&self.positive, &self.negative].into_iter().all(|class| {
            let mut count = 0usize;
            class.iter().all(|iv| {
                count += iv.members.len();
                iv.largest <= count as f64 * iv.gap * (1.0 + 1e-12)
            })
        })
    }
}

/// Partitions nonzero eigenvalues as described in the module docs. Exact zeros
/// belong to neither sign class and are skipped.
pub fn discretize_eigenvalues(eigenvalues: &[f64]) -> Result<EigenIntervalPartition> {
    if eigenvalues.iter().all(|&v| v == 0.0) {
        return Err(Error::InvalidArgument("discretization needs a nonzero eigenvalue".into()));
    }
    if let Some(v) = eigenvalues.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite eigenvalue {v}")));
    }
    let class = |positive: bool| {
        let mut idx: Vec<usize> = (0..eigenvalues.len())
            .filter(|&i| if positive { eigenvalues[i] > 0.0 } else { eigenvalues[i] < 0.0 })
            .collect();
        idx.sort_by(|&a, &b| eigenvalues[a].abs().total_cmp(&eigenvalues[b].abs()).then(a.cmp(&b)));
        partition_class(&idx, eigenvalues)
    };
    Ok(EigenIntervalPartition {
        positive: class(true),
        negative: class(false),
    })
}

fn partition_class(sorted: &[usize], values: &[f64]) -> Vec<EigenInterval> {
    let mut out: Vec<EigenInterval> = Vec::new();
    let Some(&first) = sorted.first() else {
        return out;
    };
    let mag = |i: usize| values[i].abs();
    let mut current = EigenInterval {
        gap: mag(first),
        members: vec![first],
        smallest: mag(first),
        largest: mag(first),
    };
    for pair in sorted.windows(2) {
        let step = mag(pair[1]) - mag(pair[0]);
        if step > current.gap {
            let gap = step;
            out.push(current);
            current = EigenInterval {
                gap,
                members: Vec::new(),
                smallest: mag(pair[1]),
                largest: mag(pair[1]),
            };
        }
        current.members.push(pair[1]);
        current.largest = mag(pair[1]);
    }
    out.push(current);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_interval_example() {
        let p = discretize_eigenvalues(&[0.9, 1.0, 5.0, 5.5, 10.0]).unwrap();
        assert!(p.negative.is_empty());
        let gaps: Vec<f64> = p.positive.iter().map(|iv| iv.gap).collect();
        let members: Vec<Vec<usize>> = p.positive.iter().map(|iv| iv.members.clone()).collect();
        assert_eq!(members, vec![vec![0, 1], vec![2, 3], vec![4]]);
        assert!((gaps[0] - 0.9).abs() < 1e-15);
        assert!((gaps[1] - 4.0).abs() < 1e-15);
        assert!((gaps[2] - 4.5).abs() < 1e-15);
        assert!(p.satisfies_interval_bound());
    }

    #[test]
    fn single_value() {
        let p = discretize_eigenvalues(&[3.0]).unwrap();
        assert_eq!(p.positive.len(), 1);
        assert_eq!(p.positive[0].gap, 3.0);
    }

    #[test]
    fn signed_split() {
        let p = discretize_eigenvalues(&[-2.0, -2.1, 4.0]).unwrap();
        assert_eq!(p.negative.len(), 1);
        assert_eq!(p.negative[0].gap, 2.0);
        assert_eq!(p.negative[0].members, vec![0, 1]);
        assert_eq!(p.positive.len(), 1);
        assert_eq!(p.positive[0].members, vec![2]);
    }

    #[test]
    fn tie_with_current_gap_stays_inside() {
        // 1 -> 2 is a step of exactly g1 = 1
        let p = discretize_eigenvalues(&[1.0, 2.0]).unwrap();
        assert_eq!(p.positive.len(), 1);
    }

    #[test]
    fn all_zero_rejected() {
        assert!(discretize_eigenvalues(&[0.0, 0.0]).is_err());
        assert!(discretize_eigenvalues(&[]).is_err());
    }
}
