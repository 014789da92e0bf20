use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Picks below this residual norm mean the rows span fewer than `k` directions.
pub const MIN_PICK_NORM: f64 = 1e-12;

/// Successive projection: repeatedly take the row of largest residual norm
/// (lowest index on ties) and project every row onto the orthogonal complement
/// of that row. Returns the picked row indices in selection order.
pub fn spa(x: &DMatrix<f64>, k: usize) -> Result<Vec<usize>> {
    let (m, d) = x.shape();
    if k == 0 || k > m {
        return Err(Error::InvalidArgument(format!("cannot pick {k} corners from {m} rows")));
    }
    let mut r = x.clone();
    let mut picked = Vec::with_capacity(k);
    for step in 0..k {
        let mut best = 0;
        let mut best_norm2 = -1.0;
        for i in 0..m {
            let n2: f64 = r.row(i).iter().map(|v| v * v).sum();
            if n2 > best_norm2 {
                best_norm2 = n2;
                best = i;
            }
        }
        let norm = best_norm2.max(0.0).sqrt();
        if norm < MIN_PICK_NORM {
            return Err(Error::RankDeficient {
                picked: step,
                requested: k,
                norm,
            });
        }
        picked.push(best);
        let u: Vec<f64> = r.row(best).iter().map(|v| v / norm).collect();
        for i in 0..m {
            let c: f64 = (0..d).map(|j| r[(i, j)] * u[j]).sum();
            for j in 0..d {
                r[(i, j)] -= c * u[j];
            }
        }
    }
    Ok(picked)
}
