//! Exact r-nearest-neighbor mean distances.
//!
//! Both searches compute squared distances with the same summation order and
//! reduce the r smallest values identically, so their results agree bit for bit.

use std::collections::BinaryHeap;

use nalgebra::DMatrix;
use ordered::Key;

/// Row-major copy of the points for cache-friendly scans.
pub(crate) struct Points {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Points {
    pub fn from_rows(m: &DMatrix<f64>) -> Self {
        let (n, d) = m.shape();
        let data = (0..n).flat_map(|i| (0..d).map(move |j| m[(i, j)])).collect();
        Self { dim: d, data }
    }

    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    fn dist2(&self, a: usize, b: usize) -> f64 {
        self.row(a).iter().zip(self.row(b)).map(|(x, y)| (x - y) * (x - y)).sum()
    }
}

mod ordered {
    /// Total-order wrapper for squared distances.
    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct Key(pub f64);

    impl Eq for Key {}

    impl PartialOrd for Key {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }

    impl Ord for Key {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.0.total_cmp(&other.0)
        }
    }
}

/// Mean of the square roots of the `r` smallest squared distances.
fn mean_of_smallest(mut d2: Vec<f64>, r: usize) -> f64 {
    d2.sort_by(|a, b| a.total_cmp(b));
    d2.iter().take(r).map(|v| v.sqrt()).sum::<f64>() / r as f64
}

pub(crate) fn brute_force_mean_distance(points: &Points, query: usize, r: usize) -> f64 {
    let n = points.len();
    let mut d2: Vec<f64> = (0..n).filter(|&j| j != query).map(|j| points.dist2(query, j)).collect();
    if d2.len() > r {
        d2.select_nth_unstable_by(r - 1, |a, b| a.total_cmp(b));
        d2.truncate(r);
    }
    mean_of_smallest(d2, r)
}

enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: usize, right: usize },
}

/// Static k-d tree over all points, queried with the point itself excluded.
pub(crate) struct KdTree<'a> {
    points: &'a Points,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

const LEAF_SIZE: usize = 16;

impl<'a> KdTree<'a> {
    pub fn build(points: &'a Points) -> Self {
        let mut tree = Self {
            points,
            order: (0..points.len()).collect(),
            nodes: Vec::new(),
        };
        let n = points.len();
        tree.build_node(0, n);
        tree
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE || self.points.dim == 0 {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        // split on the axis of largest spread at the median
        let dim = self.points.dim;
        let mut best_axis = 0;
        let mut best_spread = -1.0;
        for axis in 0..dim {
            let (lo, hi) = self.order[start..end].iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                let v = self.points.row(i)[axis];
                (lo.min(v), hi.max(v))
            });
            if hi - lo > best_spread {
                best_spread = hi - lo;
                best_axis = axis;
            }
        }
        if best_spread <= 0.0 {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let mid = start + (end - start) / 2;
        let points = self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points.row(a)[best_axis].total_cmp(&points.row(b)[best_axis])
        });
        let value = points.row(self.order[mid])[best_axis];
        self.nodes.push(Node::Leaf { start: 0, end: 0 });
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id] = Node::Split {
            axis: best_axis,
            value,
            left,
            right,
        };
        id
    }

    pub fn mean_distance(&self, query: usize, r: usize) -> f64 {
        let mut heap: BinaryHeap<Key> = BinaryHeap::with_capacity(r + 1);
        self.search(0, query, r, &mut heap);
        mean_of_smallest(heap.into_iter().map(|k| k.0).collect(), r)
    }

    fn search(&self, node: usize, query: usize, r: usize, heap: &mut BinaryHeap<Key>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &j in &self.order[start..end] {
                    if j == query {
                        continue;
                    }
                    let d = self.points.dist2(query, j);
                    if heap.len() < r {
                        heap.push(Key(d));
                    } else if d < heap.peek().unwrap().0 {
                        heap.pop();
                        heap.push(Key(d));
                    }
                }
            }
            Node::Split { axis, value, left, right } => {
                let diff = self.points.row(query)[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, query, r, heap);
                if heap.len() < r || diff * diff <= heap.peek().unwrap().0 {
                    self.search(far, query, r, heap);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kd_tree_equals_brute_force_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for &(n, d) in &[(300usize, 2usize), (500, 3), (200, 6)] {
            let m = DMatrix::from_fn(n, d, |_, _| rng.random::<f64>());
            let pts = Points::from_rows(&m);
            let tree = KdTree::build(&pts);
            for q in 0..n {
                assert_eq!(tree.mean_distance(q, 10), brute_force_mean_distance(&pts, q, 10));
            }
        }
    }

    #[test]
    fn duplicate_points_have_zero_mean_distance() {
        let m = DMatrix::from_element(50, 3, 0.25);
        let pts = Points::from_rows(&m);
        let tree = KdTree::build(&pts);
        assert_eq!(tree.mean_distance(7, 10), 0.0);
        assert_eq!(brute_force_mean_distance(&pts, 7, 10), 0.0);
    }
}
