use nalgebra::DMatrix;

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method
/// with potentials, `O(k^3)`). Returns `sigma` with row `a` matched to column
/// `sigma[a]`.
pub fn min_cost_assignment(cost: &DMatrix<f64>) -> Vec<usize> {
    let k = cost.nrows();
    assert_eq!(k, cost.ncols(), "assignment needs a square cost matrix");
    if k == 0 {
        return Vec::new();
    }
    // 1-based arrays; column 0 is a virtual start
    let mut u = vec![0.0; k + 1];
    let mut v = vec![0.0; k + 1];
    let mut row_of_col = vec![0usize; k + 1];
    let mut way = vec![0usize; k + 1];
    for row in 1..=k {
        row_of_col[0] = row;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[j0] = true;
            let i0 = row_of_col[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=k {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1, j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[row_of_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of_col[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of_col[j0] = row_of_col[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut sigma = vec![0; k];
    for j in 1..=k {
        sigma[row_of_col[j] - 1] = j - 1;
    }
    sigma
}

/// Maximum-weight perfect matching.
pub fn max_weight_assignment(weight: &DMatrix<f64>) -> Vec<usize> {
    min_cost_assignment(&weight.map(|w| -w))
}

pub fn assignment_cost(cost: &DMatrix<f64>, sigma: &[usize]) -> f64 {
    sigma.iter().enumerate().map(|(a, &b)| cost[(a, b)]).sum()
}
