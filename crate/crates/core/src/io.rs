//! Edge-list and membership files, fit summaries, and cleanup of observed graphs.
//!
//! Canonical edge list: an optional `# spacl-edgelist n=<n> base=<0|1>` header,
//! then one `u v` line per edge with `u < v`, sorted, 0-based. Membership CSV:
//! `#` comment lines, a `node,c0,...,c{K-1}` header, then one row per node.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::FitResult;
use crate::graph::SparseSymmetricGraph;
use crate::model::MembershipMatrix;

pub const EDGELIST_MAGIC: &str = "spacl-edgelist";

/// Translation between file ids and internal indices `0..n`: `id = index + base`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdMap {
    pub base: u64,
}

impl IdMap {
    pub fn to_original(&self, index: usize) -> u64 {
        index as u64 + self.base
    }

    pub fn to_internal(&self, id: u64) -> Option<usize> {
        id.checked_sub(self.base).map(|v| v as usize)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub lines: usize,
    pub self_loops: usize,
    pub duplicates: usize,
}

#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: SparseSymmetricGraph,
    pub ids: IdMap,
    pub report: LoadReport,
}

fn parse_header(line: &str) -> Option<(Option<usize>, Option<u64>)> {
    let mut tokens = line.trim_start_matches(['#', ' ']).split_whitespace();
    if tokens.next() != Some(EDGELIST_MAGIC) {
        return None;
    }
    let (mut n, mut base) = (None, None);
    for t in tokens {
        if let Some(v) = t.strip_prefix("n=") {
            n = v.parse().ok();
        } else if let Some(v) = t.strip_prefix("base=") {
            base = v.parse().ok();
        }
    }
    Some((n, base))
}

/// Reads a whitespace-separated edge list. Ids are 0-based when the smallest id
/// is 0 and 1-based otherwise, unless a header fixes the base and node count.
/// Columns after the second are ignored.
pub fn load_graph(path: impl AsRef<Path>) -> Result<LoadedGraph> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut pairs: Vec<(u64, u64)> = Vec::new();
    let mut header: Option<(Option<usize>, Option<u64>)> = None;
    let mut lines = 0;
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        lines += 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('#') || trimmed.starts_with('%') {
            if header.is_none() {
                header = parse_header(trimmed);
            }
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let mut id = || -> Result<u64> {
            let tok = tokens.next().ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: "expected two node ids".into(),
            })?;
            tok.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: format!("'{tok}' is not a nonnegative integer id"),
            })
        };
        let u = id()?;
        let v = id()?;
        pairs.push((u, v));
    }
    let (header_n, header_base) = header.unwrap_or((None, None));
    if pairs.is_empty() && header_n.is_none() {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    let min_id = pairs.iter().map(|&(u, v)| u.min(v)).min();
    let base = header_base.unwrap_or(match min_id {
        Some(0) | None => 0,
        Some(_) => 1,
    });
    let max_id = pairs.iter().map(|&(u, v)| u.max(v)).max();
    if let Some(m) = min_id.filter(|&m| m < base) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: format!("id {m} is below the declared base {base}"),
        });
    }
    let n = header_n.unwrap_or_else(|| max_id.map_or(0, |m| (m - base + 1) as usize));
    let ids = IdMap { base };
    let edges = pairs
        .iter()
        .map(|&(u, v)| ((u - base) as usize, (v - base) as usize));
    let (graph, stats) = SparseSymmetricGraph::from_edges(n, edges).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })?;
    Ok(LoadedGraph {
        graph,
        ids,
        report: LoadReport {
            lines,
            self_loops: stats.self_loops,
            duplicates: stats.duplicates,
        },
    })
}

/// Writes the canonical form; `comments` become leading `#` lines after the header.
pub fn save_graph(path: impl AsRef<Path>, graph: &SparseSymmetricGraph, comments: &[String]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        writeln!(w, "# {EDGELIST_MAGIC} n={} base=0", graph.n())?;
        for c in comments {
            writeln!(w, "# {c}")?;
        }
        for (u, v) in graph.edges() {
            writeln!(w, "{u} {v}")?;
        }
        w.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

/// Raw contents of a membership file.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipTable {
    pub nodes: Vec<u64>,
    /// One row per entry of `nodes`, as written in the file.
    pub values: DMatrix<f64>,
}

impl MembershipTable {
    pub fn k(&self) -> usize {
        self.values.ncols()
    }

    /// Rows scaled to sum to one; all-zero rows stay zero and are flagged.
    pub fn to_membership(&self) -> Result<MembershipMatrix> {
        MembershipMatrix::from_unnormalized(self.values.clone())
    }

    /// Rows reordered by ascending node id.
    pub fn sorted_by_node(&self) -> Self {
        let mut order: Vec<usize> = (0..self.nodes.len()).collect();
        order.sort_by_key(|&i| self.nodes[i]);
        Self {
            nodes: order.iter().map(|&i| self.nodes[i]).collect(),
            values: DMatrix::from_fn(order.len(), self.k(), |r, c| self.values[(order[r], c)]),
        }
    }
}

fn membership_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Membership {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Reads a membership CSV. With `expected_k`, a header with a different column
/// count is rejected.
pub fn load_membership(path: impl AsRef<Path>, expected_k: Option<usize>) -> Result<MembershipTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file));
    let header = reader.headers().map_err(|e| membership_error(path, e.to_string()))?.clone();
    let k = header.len().saturating_sub(1);
    let expected_header: Vec<String> = std::iter::once("node".to_string())
        .chain((0..k).map(|c| format!("c{c}")))
        .collect();
    if k == 0 || header.iter().ne(expected_header.iter().map(String::as_str)) {
        return Err(membership_error(path, format!("header must be node,c0,...; got '{}'", header.iter().collect::<Vec<_>>().join(","))));
    }
    if let Some(e) = expected_k.filter(|&e| e != k) {
        return Err(membership_error(path, format!("expected {e} communities, header has {k}")));
    }
    let mut nodes = Vec::new();
    let mut values = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| membership_error(path, e.to_string()))?;
        let at = || format!("data row {}", row + 1);
        if record.len() != k + 1 {
            return Err(membership_error(path, format!("{}: expected {} fields, got {}", at(), k + 1, record.len())));
        }
        nodes.push(
            record[0]
                .parse::<u64>()
                .map_err(|_| membership_error(path, format!("{}: bad node id '{}'", at(), &record[0])))?,
        );
        for field in record.iter().skip(1) {
            let v: f64 = field
                .parse()
                .map_err(|_| membership_error(path, format!("{}: bad value '{field}'", at())))?;
            if !(v.is_finite() && v >= 0.0) {
                return Err(membership_error(path, format!("{}: value {v} is negative or not finite", at())));
            }
            values.push(v);
        }
    }
    let n = nodes.len();
    Ok(MembershipTable {
        nodes,
        values: DMatrix::from_row_slice(n, k, &values),
    })
}

/// Writes `node,c0,...` rows; `nodes` defaults to `0..n`. Values use the
/// shortest representation that parses back to the same `f64`.
pub fn save_membership(
    path: impl AsRef<Path>,
    theta: &DMatrix<f64>,
    nodes: Option<&[u64]>,
    comments: &[String],
) -> Result<()> {
    let path = path.as_ref();
    if let Some(ids) = nodes.filter(|ids| ids.len() != theta.nrows()) {
        return Err(Error::DimensionMismatch(format!("{} node ids for {} rows", ids.len(), theta.nrows())));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        for c in comments {
            writeln!(w, "# {c}")?;
        }
        let mut header = String::from("node");
        for c in 0..theta.ncols() {
            header.push_str(&format!(",c{c}"));
        }
        writeln!(w, "{header}")?;
        for i in 0..theta.nrows() {
            let id = nodes.map_or(i as u64, |ids| ids[i]);
            write!(w, "{id}")?;
            for v in theta.row(i).iter() {
                write!(w, ",{v:?}")?;
            }
            writeln!(w)?;
        }
        w.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

/// JSON-friendly view of a [`FitResult`] with node ids in file numbering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub k: usize,
    pub n: usize,
    pub rho_hat: f64,
    /// Row-major.
    pub b_hat: Vec<Vec<f64>>,
    pub pure_nodes: Vec<u64>,
    pub pruned_nodes: Vec<u64>,
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub corner_condition: f64,
    pub zeroed_rows: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_seconds: Option<f64>,
}

impl FitSummary {
    pub fn new(fit: &FitResult, ids: &IdMap) -> Self {
        let k = fit.b_hat.nrows();
        Self {
            k,
            n: fit.theta_hat.n(),
            rho_hat: fit.rho_hat,
            b_hat: (0..k).map(|i| fit.b_hat.row(i).iter().copied().collect()).collect(),
            pure_nodes: fit.pure_indices.iter().map(|&i| ids.to_original(i)).collect(),
            pruned_nodes: fit.pruned_set.iter().map(|&i| ids.to_original(i)).collect(),
            eigenvalues: fit.spectrum.eigenvalues.iter().copied().collect(),
            residuals: fit.spectrum.residuals.iter().copied().collect(),
            corner_condition: fit.corner_condition,
            zeroed_rows: fit.theta_hat.zeroed_count(),
            elapsed_seconds: None,
        }
    }

    pub fn b_hat_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.k, self.k, |i, j| self.b_hat[i][j])
    }
}

pub fn save_fit(path: impl AsRef<Path>, summary: &FitSummary) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, summary)
        .map_err(std::io::Error::from)
        .and_then(|_| writeln!(w))
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn load_fit(path: impl AsRef<Path>) -> Result<FitSummary> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PreprocessMode {
    /// Repeat both rules until nothing changes.
    #[default]
    Fixpoint,
    /// Evaluate both rules once on the input and remove the union.
    SinglePass,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RemovalReport {
    /// Nodes removed for having an all-zero membership row.
    pub no_community: usize,
    /// Nodes removed for having no neighbors (and some community).
    pub zero_degree: usize,
    pub passes: usize,
}

#[derive(Debug, Clone)]
pub struct Preprocessed {
    pub graph: SparseSymmetricGraph,
    pub memberships: DMatrix<f64>,
    /// Input index of each kept node, ascending.
    pub kept: Vec<usize>,
    pub report: RemovalReport,
}

/// Deletes nodes without any community and nodes without neighbors.
pub fn preprocess_real_graph(
    graph: &SparseSymmetricGraph,
    memberships: &DMatrix<f64>,
    mode: PreprocessMode,
) -> Result<Preprocessed> {
    if memberships.nrows() != graph.n() {
        return Err(Error::DimensionMismatch(format!(
            "{} membership rows for {} nodes",
            memberships.nrows(),
            graph.n()
        )));
    }
    let mut kept: Vec<usize> = (0..graph.n()).collect();
    let mut current = graph.clone();
    let mut report = RemovalReport::default();
    loop {
        report.passes += 1;
        let mut keep_local = Vec::with_capacity(kept.len());
        for (local, &orig) in kept.iter().enumerate() {
            if memberships.row(orig).iter().all(|&v| v == 0.0) {
                report.no_community += 1;
            } else if current.degree(local) == 0 {
                report.zero_degree += 1;
            } else {
                keep_local.push(local);
            }
        }
        let changed = keep_local.len() != kept.len();
        current = current.induced_subgraph(&keep_local);
        kept = keep_local.iter().map(|&l| kept[l]).collect();
        if !changed || mode == PreprocessMode::SinglePass {
            break;
        }
    }
    let k = memberships.ncols();
    let memberships = DMatrix::from_fn(kept.len(), k, |r, c| memberships[(kept[r], c)]);
    Ok(Preprocessed {
        graph: current,
        memberships,
        kept,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn two_line_file() {
        let dir = tempfile::tempdir().unwrap();
        let g = load_graph(write(&dir, "g.txt", "0 1\n1 2\n")).unwrap();
        assert_eq!(g.graph.n(), 3);
        assert_eq!(g.graph.num_edges(), 2);
        assert_eq!(g.ids.base, 0);
    }

    #[test]
    fn self_loop_and_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        let g = load_graph(write(&dir, "g.txt", "% comment\n0 1\n1 0\n1 1\n0 1\n")).unwrap();
        assert_eq!(g.graph.num_edges(), 1);
        assert_eq!(g.report.self_loops, 1);
        assert_eq!(g.report.duplicates, 2);
    }

    #[test]
    fn one_based_ids_detected() {
        let dir = tempfile::tempdir().unwrap();
        let g = load_graph(write(&dir, "g.txt", "1 2\n2 3\n")).unwrap();
        assert_eq!(g.ids.base, 1);
        assert_eq!(g.graph.n(), 3);
        assert!(g.graph.has_edge(0, 1));
        assert_eq!(g.ids.to_original(2), 3);
    }

    #[test]
    fn malformed_line_reports_number() {
        let dir = tempfile::tempdir().unwrap();
        let err = load_graph(write(&dir, "g.txt", "0 1\n0 x\n")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = load_graph(write(&dir, "h.txt", "0 1\n7\n")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn empty_file_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_graph(write(&dir, "g.txt", "# nothing\n")), Err(Error::EmptyFile(_))));
    }

    #[test]
    fn canonical_round_trip_keeps_isolated_tail() {
        let dir = tempfile::tempdir().unwrap();
        let (g, _) = SparseSymmetricGraph::from_edges(6, [(3, 1), (0, 2)]).unwrap();
        let p = dir.path().join("c.txt");
        save_graph(&p, &g, &["seed=1".into()]).unwrap();
        let back = load_graph(&p).unwrap();
        assert_eq!(back.graph, g);
        let p2 = dir.path().join("d.txt");
        save_graph(&p2, &back.graph, &["seed=1".into()]).unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn membership_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let theta = DMatrix::from_row_slice(3, 2, &[0.1, 0.9, 1.0 / 3.0, 2.0 / 3.0, 0.0, 0.0]);
        let p = dir.path().join("m.csv");
        save_membership(&p, &theta, Some(&[5, 6, 7]), &["truth".into()]).unwrap();
        let t = load_membership(&p, Some(2)).unwrap();
        assert_eq!(t.values, theta);
        assert_eq!(t.nodes, vec![5, 6, 7]);
        assert!(matches!(load_membership(&p, Some(3)), Err(Error::Membership { .. })));
    }

    #[test]
    fn negative_membership_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "m.csv", "node,c0,c1\n0,0.5,-0.5\n");
        assert!(load_membership(&p, None).is_err());
        let p = write(&dir, "h.csv", "id,a,b\n0,0.5,0.5\n");
        assert!(load_membership(&p, None).is_err());
    }

    #[test]
    fn binary_truth_normalizes() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "m.csv", "node,c0,c1,c2\n0,1,0,0\n1,0,1,1\n2,0,0,0\n");
        let m = load_membership(&p, Some(3)).unwrap().to_membership().unwrap();
        assert_eq!(m.matrix().row(0).iter().sum::<f64>(), 1.0);
        assert_eq!(m.matrix()[(1, 1)], 0.5);
        assert_eq!(m.zeroed(), &[false, false, true]);
    }

    #[test]
    fn preprocessing_rules() {
        // 0-1 edge where 1 has no community, 2 isolated, 3-4 edge kept
        let (g, _) = SparseSymmetricGraph::from_edges(5, [(0, 1), (3, 4)]).unwrap();
        let m = DMatrix::from_row_slice(5, 1, &[1.0, 0.0, 1.0, 1.0, 1.0]);
        let fix = preprocess_real_graph(&g, &m, PreprocessMode::Fixpoint).unwrap();
        assert_eq!(fix.kept, vec![3, 4]);
        assert_eq!(fix.report.no_community, 1);
        assert_eq!(fix.report.zero_degree, 2);
        assert_eq!(fix.graph.num_edges(), 1);
        let single = preprocess_real_graph(&g, &m, PreprocessMode::SinglePass).unwrap();
        assert_eq!(single.kept, vec![0, 3, 4]);
        assert_eq!(single.graph.degree(0), 0);
    }
}
