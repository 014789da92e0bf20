//! Simulation of MMSB instances: memberships, population matrix and adjacency.
//!
//! Every random draw comes from a ChaCha8 stream keyed by the master seed and a
//! per-purpose domain tag, with one sub-stream per row index. Rows can therefore
//! be generated in parallel and the output depends on the seed alone.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::SparseSymmetricGraph;
use crate::model::{DenseSymmetricMatrix, MembershipMatrix, ModelParams};

const THETA_DOMAIN: u64 = 0x7468_6574_615f_726f;
const PURE_DOMAIN: u64 = 0x7075_7265_5f72_6f77;
const EDGE_DOMAIN: u64 = 0x6564_6765_5f72_6f77;

/// Where injected pure nodes go.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PurePlacement {
    /// Rows `0..K`, row `c` pure in community `c`.
    FirstRows,
    /// `K` distinct rows drawn uniformly from the seed.
    RandomRows,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerConfig {
    pub seed: u64,
    pub inject_pure: bool,
    pub pure_placement: PurePlacement,
}

impl SamplerConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inject_pure: true,
            pure_placement: PurePlacement::FirstRows,
        }
    }

    pub fn without_pure(mut self) -> Self {
        self.inject_pure = false;
        self
    }

    pub fn with_placement(mut self, placement: PurePlacement) -> Self {
        self.pure_placement = placement;
        self
    }
}

fn row_rng(seed: u64, domain: u64, row: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ domain);
    rng.set_stream(row as u64);
    rng
}

/// Log of a Gamma(shape, 1) draw, stable for very small shapes.
///
/// For `shape < 1` uses `G(a) = G(a + 1) U^(1/a)` in log space, which keeps the
/// relative sizes of draws meaningful long after the draws themselves underflow.
fn log_gamma_draw<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape >= 1.0 {
        let g: f64 = Gamma::new(shape, 1.0).expect("positive shape").sample(rng);
        g.ln()
    } else {
        let g: f64 = Gamma::new(shape + 1.0, 1.0).expect("positive shape").sample(rng);
        let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
        g.ln() + u.ln() / shape
    }
}

/// One Dirichlet(alpha) draw via normalized Gamma variates.
pub fn dirichlet_draw<R: Rng + ?Sized>(alpha: &[f64], rng: &mut R) -> Vec<f64> {
    let logs: Vec<f64> = alpha.iter().map(|&a| log_gamma_draw(a, rng)).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = w.iter().sum();
    for v in &mut w {
        *v /= sum;
    }
    w
}

/// Draws `theta_i ~ Dirichlet(alpha)` for every node, then optionally overwrites
/// `K` rows with the standard basis vectors.
pub fn sample_theta(params: &ModelParams, config: &SamplerConfig) -> Result<MembershipMatrix> {
    let n = params.n();
    let k = params.k();
    if config.inject_pure && n < k {
        return Err(Error::InvalidArgument(format!("cannot inject {k} pure rows into {n} nodes")));
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| dirichlet_draw(params.alpha(), &mut row_rng(config.seed, THETA_DOMAIN, i)))
        .collect();
    let mut theta = DMatrix::from_fn(n, k, |i, j| rows[i][j]);

    let mut pure_rows = Vec::new();
    if config.inject_pure {
        pure_rows = match config.pure_placement {
            PurePlacement::FirstRows => (0..k).collect(),
            PurePlacement::RandomRows => {
                let mut rng = row_rng(config.seed, PURE_DOMAIN, 0);
                rand::seq::index::sample(&mut rng, n, k).into_vec()
            }
        };
        for (c, &r) in pure_rows.iter().enumerate() {
            for j in 0..k {
                theta[(r, j)] = if j == c { 1.0 } else { 0.0 };
            }
        }
    }
    MembershipMatrix::new(theta)?.with_pure_rows(pure_rows)
}

/// `P = rho Theta B Theta^T`, entries clamped into `[0, rho]` against rounding.
pub fn build_population_matrix(theta: &MembershipMatrix, params: &ModelParams) -> Result<DenseSymmetricMatrix> {
    if theta.k() != params.k() {
        return Err(Error::DimensionMismatch(format!(
            "theta has {} columns, model has K = {}",
            theta.k(),
            params.k()
        )));
    }
    let t = theta.matrix();
    let rho = params.rho();
    let mut p = (t * params.b()) * t.transpose() * rho;
    let n = p.nrows();
    for i in 0..n {
        for j in i..n {
            let v = (0.5 * (p[(i, j)] + p[(j, i)])).clamp(0.0, rho);
            p[(i, j)] = v;
            p[(j, i)] = v;
        }
    }
    DenseSymmetricMatrix::new(p)
}

/// Includes each pair `{i, j}`, `i < j`, independently with probability `P[i, j]`.
pub fn sample_adjacency(p: &DenseSymmetricMatrix, config: &SamplerConfig) -> Result<SparseSymmetricGraph> {
    let m = p.matrix();
    let n = p.n();
    for j in 0..n {
        for i in 0..n {
            let v = m[(i, j)];
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::ProbabilityOutOfRange { row: i, col: j, value: v });
            }
        }
    }
    let rows: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = row_rng(config.seed, EDGE_DOMAIN, i);
            ((i + 1)..n).filter(|&j| rng.random::<f64>() < m[(i, j)]).collect()
        })
        .collect();
    Ok(SparseSymmetricGraph::from_upper_rows(n, rows))
}

/// Same Bernoulli semantics as [`sample_adjacency`], without materializing `P`.
///
/// Row `i` proposes partners `j > i` at rate `u_i = max_c (rho B theta_i)_c`, an
/// upper bound on `P[i, j]` over the simplex, using geometric skips; each proposal
/// is kept with probability `P[i, j] / u_i`. Work is proportional to the number of
/// proposals rather than `n^2`.
pub fn sample_adjacency_lowrank(
    theta: &MembershipMatrix,
    params: &ModelParams,
    config: &SamplerConfig,
) -> Result<SparseSymmetricGraph> {
    if theta.k() != params.k() {
        return Err(Error::DimensionMismatch(format!(
            "theta has {} columns, model has K = {}",
            theta.k(),
            params.k()
        )));
    }
    let n = theta.n();
    let k = theta.k();
    let t = theta.matrix();
    // row i of t_rows is theta_i, stored contiguously
    let t_rows: Vec<f64> = (0..n).flat_map(|i| (0..k).map(move |c| t[(i, c)])).collect();
    let weights = t * params.scaled_b(); // row i: rho B theta_i
    let weights = &weights;
    let w_rows: Vec<f64> = (0..n).flat_map(|i| (0..k).map(move |c| weights[(i, c)])).collect();

    let rows: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let w = &w_rows[i * k..(i + 1) * k];
            let bound = w.iter().copied().fold(0.0_f64, f64::max).min(1.0);
            let mut out = Vec::new();
            if bound <= 0.0 {
                return out;
            }
            let mut rng = row_rng(config.seed, EDGE_DOMAIN, i);
            let log_q = (-bound).ln_1p();
            let mut j = i;
            loop {
                if bound >= 1.0 {
                    j += 1;
                } else {
                    let u = 1.0 - rng.random::<f64>();
                    let skip = (u.ln() / log_q).floor();
                    if skip >= (n - j) as f64 {
                        break;
                    }
                    j += 1 + skip as usize;
                }
                if j >= n {
                    break;
                }
                let tj = &t_rows[j * k..(j + 1) * k];
                let pij: f64 = w.iter().zip(tj).map(|(a, b)| a * b).sum();
                if rng.random::<f64>() * bound < pij {
                    out.push(j);
                }
            }
            out
        })
        .collect();
    Ok(SparseSymmetricGraph::from_upper_rows(n, rows))
}

/// Draws memberships and a graph from the model.
pub fn sample_graph(params: &ModelParams, config: &SamplerConfig) -> Result<(MembershipMatrix, SparseSymmetricGraph)> {
    let theta = sample_theta(params, config)?;
    let graph = sample_adjacency_lowrank(&theta, params, config)?;
    Ok((theta, graph))
}

/// Expected average degree `2 / n * sum_{i<j} P[i, j]`, computed without forming `P`.
pub fn expected_average_degree(theta: &MembershipMatrix, params: &ModelParams) -> f64 {
    let t = theta.matrix();
    let n = t.nrows();
    let col_sum: DVector<f64> = t.row_sum().transpose();
    let rb = params.scaled_b();
    let total = (col_sum.transpose() * &rb * &col_sum)[(0, 0)];
    let diag: f64 = t.row_iter().map(|r| (r * &rb * r.transpose())[(0, 0)]).sum();
    (total - diag) / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(n: usize, alpha: Vec<f64>, diag: f64, off: f64, rho: f64) -> ModelParams {
        let k = alpha.len();
        let b = DMatrix::from_fn(k, k, |i, j| if i == j { diag } else { off });
        ModelParams::normalized(n, alpha, b, rho).unwrap()
    }

    #[test]
    fn theta_rows_are_stochastic() {
        let p = model(5000, vec![0.4; 3], 1.0, 0.001, 0.007);
        let theta = sample_theta(&p, &SamplerConfig::new(3)).unwrap();
        assert_eq!(theta.n(), 5000);
        for row in theta.matrix().row_iter() {
            assert!(row.iter().all(|v| *v >= 0.0));
            assert!((row.sum() - 1.0).abs() <= 1e-12);
        }
        assert_eq!(theta.pure_rows(), &[0, 1, 2]);
    }

    #[test]
    fn single_community_rows_are_one() {
        let p = model(50, vec![0.7], 1.0, 0.0, 0.1);
        let theta = sample_theta(&p, &SamplerConfig::new(1).without_pure()).unwrap();
        assert!(theta.matrix().iter().all(|v| *v == 1.0));
    }

    #[test]
    fn tiny_alpha_concentrates_on_a_vertex() {
        // Beta(1e-9, 1e-9) puts mass ~ 2e-9 * ln(1e6) per draw away from {0, 1};
        // over 1e4 draws the chance of any violation is below 1e-3.
        let alpha = [1e-9, 1e-9];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let row = dirichlet_draw(&alpha, &mut rng);
            let max = row.iter().copied().fold(0.0, f64::max);
            assert!(max >= 1.0 - 1e-6, "row {row:?}");
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn population_of_pure_nodes_is_rho_b() {
        let p = model(3, vec![1.0; 3], 1.0, 0.3, 0.2);
        let theta = MembershipMatrix::new(DMatrix::identity(3, 3)).unwrap();
        let pop = build_population_matrix(&theta, &p).unwrap();
        assert_eq!(pop.matrix(), &p.scaled_b());
    }

    #[test]
    fn population_triple_product_by_hand() {
        // theta_3 = (.5, .5): P13 = .5*1 + .5*.2 = .6; P23 = .5*.2 + .5*.6 = .4;
        // P33 = .25*(1 + .2 + .2 + .6) = .5
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 0.6]);
        let params = ModelParams::new(3, vec![1.0, 1.0], b, 1.0).unwrap();
        let theta = MembershipMatrix::new(DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.5, 0.5])).unwrap();
        let pop = build_population_matrix(&theta, &params).unwrap();
        let m = pop.matrix();
        assert!((m[(0, 2)] - 0.6).abs() < 1e-15);
        assert!((m[(1, 2)] - 0.4).abs() < 1e-15);
        assert!((m[(2, 2)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fig1_population_max_is_rho() {
        let p = model(500, vec![0.4; 3], 1.0, 0.001, 0.007);
        let theta = sample_theta(&p, &SamplerConfig::new(5)).unwrap();
        let pop = build_population_matrix(&theta, &p).unwrap();
        let max = pop.matrix().max();
        assert!((max - 0.007).abs() < 1e-15);
        assert!(pop.matrix().min() >= 0.0);
    }

    #[test]
    fn population_dimension_mismatch() {
        let p = model(3, vec![1.0; 2], 1.0, 0.3, 0.2);
        let theta = MembershipMatrix::new(DMatrix::identity(3, 3)).unwrap();
        assert!(build_population_matrix(&theta, &p).is_err());
    }

    #[test]
    fn zero_and_one_probabilities() {
        let zero = DenseSymmetricMatrix::new(DMatrix::zeros(20, 20)).unwrap();
        assert_eq!(sample_adjacency(&zero, &SamplerConfig::new(0)).unwrap().num_edges(), 0);
        let ones = DenseSymmetricMatrix::new(DMatrix::from_fn(20, 20, |i, j| if i == j { 0.0 } else { 1.0 })).unwrap();
        assert_eq!(sample_adjacency(&ones, &SamplerConfig::new(0)).unwrap().num_edges(), 190);
    }

    #[test]
    fn out_of_range_probability_rejected() {
        let bad = DenseSymmetricMatrix::new(DMatrix::from_element(3, 3, 1.5)).unwrap();
        assert!(matches!(
            sample_adjacency(&bad, &SamplerConfig::new(0)),
            Err(Error::ProbabilityOutOfRange { .. })
        ));
    }

    #[test]
    fn lowrank_sampler_complete_graph_when_rho_is_one() {
        let p = model(30, vec![1.0], 1.0, 0.0, 1.0);
        let (_, g) = sample_graph(&p, &SamplerConfig::new(2).without_pure()).unwrap();
        assert_eq!(g.num_edges(), 30 * 29 / 2);
    }

    #[test]
    fn fig1_average_degree_in_range() {
        for (rho, seed) in [(0.005, 1u64), (0.007, 2)] {
            let p = model(5000, vec![0.4; 3], 1.0, 0.001, rho);
            let (_, g) = sample_graph(&p, &SamplerConfig::new(seed)).unwrap();
            let d = g.average_degree();
            assert!((7.0..=13.0).contains(&d), "rho {rho}: average degree {d}");
        }
    }

    #[test]
    fn random_pure_placement_is_permutation() {
        let p = model(100, vec![0.5; 4], 1.0, 0.1, 0.1);
        let cfg = SamplerConfig::new(9).with_placement(PurePlacement::RandomRows);
        let theta = sample_theta(&p, &cfg).unwrap();
        let rows = theta.pure_rows();
        assert_eq!(rows.len(), 4);
        let mut comms: Vec<usize> = rows.iter().map(|&r| theta.pure_community(r).unwrap()).collect();
        comms.sort();
        assert_eq!(comms, vec![0, 1, 2, 3]);
    }
}
