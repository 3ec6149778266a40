//! Undirected, unweighted graphs stored as a symmetric CSR adjacency.

use std::collections::BTreeSet;
use std::path::Path;

use ndarray::Array2;
use rand::Rng;

use crate::error::{GdnError, Result};

/// Symmetric sparse adjacency of an undirected graph.
///
/// Every undirected edge `{u, v}` appears once in [`edges`](Self::edges) as
/// `(min, max)` and twice in the CSR arrays, so row traversal needs no
/// special casing for direction.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseGraph {
    n_nodes: usize,
    edges: Vec<(usize, usize)>,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseGraph {
    /// Builds a graph from an edge iterator. Reversed and repeated pairs are
    /// merged; self-loops and out-of-range indices are errors.
    pub fn from_edges<I>(n_nodes: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(GdnError::SelfLoop { line: 0, node: u });
            }
            for idx in [u, v] {
                if idx >= n_nodes {
                    return Err(GdnError::IndexOutOfRange { index: idx, n_nodes });
                }
            }
            set.insert((u.min(v), u.max(v)));
        }
        Ok(Self::from_sorted_unique(n_nodes, set.into_iter().collect()))
    }

    /// Graph with `n_nodes` nodes and no edges.
    pub fn edgeless(n_nodes: usize) -> Self {
        Self::from_sorted_unique(n_nodes, Vec::new())
    }

    fn from_sorted_unique(n_nodes: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut degree = vec![0usize; n_nodes];
        for &(u, v) in &edges {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut row_offsets = Vec::with_capacity(n_nodes + 1);
        row_offsets.push(0);
        for d in &degree {
            row_offsets.push(row_offsets.last().unwrap() + d);
        }
        let nnz = *row_offsets.last().unwrap();
        let mut col_indices = vec![0usize; nnz];
        let mut cursor = row_offsets[..n_nodes].to_vec();
        for &(u, v) in &edges {
            col_indices[cursor[u]] = v;
            cursor[u] += 1;
            col_indices[cursor[v]] = u;
            cursor[v] += 1;
        }
        for i in 0..n_nodes {
            col_indices[row_offsets[i]..row_offsets[i + 1]].sort_unstable();
        }
        SparseGraph {
            n_nodes,
            edges,
            row_offsets,
            col_indices,
            values: vec![1.0; nnz],
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Undirected edges, each once as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.col_indices[self.row_offsets[node]..self.row_offsets[node + 1]]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.row_offsets[node + 1] - self.row_offsets[node]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Dense adjacency; intended for oracles on small graphs.
    pub fn to_dense(&self) -> Array2<f64> {
        let mut a = Array2::zeros((self.n_nodes, self.n_nodes));
        for &(u, v) in &self.edges {
            a[[u, v]] = 1.0;
            a[[v, u]] = 1.0;
        }
        a
    }

    /// Disjoint union; node indices of `other` are shifted by `self.n_nodes()`.
    pub fn disjoint_union(&self, other: &SparseGraph) -> SparseGraph {
        let shift = self.n_nodes;
        let edges = self
            .edges
            .iter()
            .copied()
            .chain(other.edges.iter().map(|&(u, v)| (u + shift, v + shift)))
            .collect();
        Self::from_sorted_unique(self.n_nodes + other.n_nodes, edges)
    }

    /// Checks the structural invariants: symmetric CSR, sorted rows, no
    /// self-loops, no duplicates.
    pub fn check_invariants(&self) -> Result<()> {
        let bad = |msg: String| Err(GdnError::InvalidArgument(msg));
        if self.row_offsets.len() != self.n_nodes + 1 || self.row_offsets[0] != 0 {
            return bad("row_offsets length/origin".into());
        }
        if self.row_offsets.windows(2).any(|w| w[0] > w[1]) {
            return bad("row_offsets decreasing".into());
        }
        if *self.row_offsets.last().unwrap() != self.col_indices.len()
            || self.col_indices.len() != self.values.len()
            || self.col_indices.len() != 2 * self.edges.len()
        {
            return bad("nnz bookkeeping".into());
        }
        for i in 0..self.n_nodes {
            let row = self.neighbors(i);
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("row {i} not strictly sorted"));
            }
            for &j in row {
                if j == i {
                    return bad(format!("self-loop at {i}"));
                }
                if !self.has_edge(j, i) {
                    return bad(format!("asymmetric entry ({i},{j})"));
                }
            }
        }
        if self.edges.windows(2).any(|w| w[0] >= w[1]) || self.edges.iter().any(|&(u, v)| u >= v)
        {
            return bad("edge list not canonical".into());
        }
        Ok(())
    }
}

/// Reads an edge-list file (see [`parse_edge_list`]).
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<SparseGraph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| GdnError::io(path, e))?;
    parse_edge_list(&text)
}

/// Parses the edge-list text format: one `u v` pair per line, `#` starts a
/// comment, and an optional first directive `nodes N` fixes the node count.
/// Without the header the node count is `1 + max index`.
pub fn parse_edge_list(text: &str) -> Result<SparseGraph> {
    let mut declared: Option<usize> = None;
    let mut pairs = Vec::new();
    let mut seen_content = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let first = tokens.next().unwrap();
        if first == "nodes" {
            if seen_content {
                return Err(GdnError::Parse {
                    line: line_no,
                    message: "`nodes` header must precede edges".into(),
                });
            }
            let n = parse_index(tokens.next(), line_no)?;
            if tokens.next().is_some() {
                return Err(trailing(line_no));
            }
            declared = Some(n);
            seen_content = true;
            continue;
        }
        seen_content = true;
        let u = parse_index(Some(first), line_no)?;
        let v = parse_index(tokens.next(), line_no)?;
        if tokens.next().is_some() {
            return Err(trailing(line_no));
        }
        if u == v {
            return Err(GdnError::SelfLoop { line: line_no, node: u });
        }
        pairs.push((u, v, line_no));
    }

    let n_nodes = match declared {
        Some(n) => {
            if let Some(&(u, v, line)) = pairs.iter().find(|&&(u, v, _)| u.max(v) >= n) {
                return Err(GdnError::Parse {
                    line,
                    message: format!("node index {} exceeds declared count {n}", u.max(v)),
                });
            }
            n
        }
        None => pairs
            .iter()
            .map(|&(u, v, _)| u.max(v))
            .max()
            .map(|m| m.checked_add(1).ok_or(GdnError::IndexOutOfRange {
                index: m,
                n_nodes: usize::MAX,
            }))
            .transpose()?
            .unwrap_or(0),
    };
    if n_nodes == 0 {
        return Err(GdnError::EmptyGraph);
    }
    SparseGraph::from_edges(n_nodes, pairs.into_iter().map(|(u, v, _)| (u, v)))
}

fn parse_index(token: Option<&str>, line: usize) -> Result<usize> {
    let token = token.ok_or_else(|| GdnError::Parse {
        line,
        message: "expected two node indices".into(),
    })?;
    token.parse::<usize>().map_err(|e| GdnError::Parse {
        line,
        message: format!("bad node index {token:?}: {e}"),
    })
}

fn trailing(line: usize) -> GdnError {
    GdnError::Parse {
        line,
        message: "unexpected trailing tokens".into(),
    }
}

/// Writes the edge-list format accepted by [`parse_edge_list`], header included.
pub fn write_edge_list(g: &SparseGraph) -> String {
    let mut out = format!("nodes {}\n", g.n_nodes());
    for &(u, v) in g.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

/// DropEdge: keeps each undirected edge independently with probability
/// `keep_prob`. Edges are visited in canonical order, one draw each, so the
/// result is a pure function of the rng state.
pub fn drop_edge<R: Rng + ?Sized>(g: &SparseGraph, keep_prob: f64, rng: &mut R) -> SparseGraph {
    let keep_prob = keep_prob.clamp(0.0, 1.0);
    let kept = g
        .edges()
        .iter()
        .copied()
        .filter(|_| rng.random::<f64>() < keep_prob)
        .collect();
    SparseGraph::from_sorted_unique(g.n_nodes(), kept)
}

/// How a configured DropEdge rate is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropEdgeRate {
    /// The rate is the probability of keeping an edge.
    #[default]
    Keep,
    /// The rate is the probability of removing an edge.
    Drop,
}

impl DropEdgeRate {
    pub fn keep_prob(self, rate: f64) -> f64 {
        match self {
            DropEdgeRate::Keep => rate,
            DropEdgeRate::Drop => 1.0 - rate,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_edge() {
        let g = parse_edge_list("0 1").unwrap();
        assert_eq!(g.n_nodes(), 2);
        assert_eq!(g.n_edges(), 1);
        assert_eq!(g.values(), &[1.0, 1.0]);
        assert_eq!(g.row_offsets(), &[0, 1, 2]);
        assert_eq!(g.col_indices(), &[1, 0]);
    }

    #[test]
    fn dedup_reversed_and_repeated() {
        let a = parse_edge_list("0 1").unwrap();
        let b = parse_edge_list("0 1\n1 0\n0 1").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn self_loop_rejected() {
        match parse_edge_list("0 0") {
            Err(GdnError::SelfLoop { line: 1, node: 0 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn header_comments_and_isolated_nodes() {
        let g = parse_edge_list("# toy\nnodes 5\n0 1 # first\n\n3 1\n").unwrap();
        assert_eq!(g.n_nodes(), 5);
        assert_eq!(g.edges(), &[(0, 1), (1, 3)]);
        assert_eq!(g.degree(4), 0);
        g.check_invariants().unwrap();
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match parse_edge_list("0 1\n2 x\n") {
            Err(GdnError::Parse { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match parse_edge_list("0 1\n2\n") {
            Err(GdnError::Parse { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match parse_edge_list("nodes 2\n0 5\n") {
            Err(GdnError::Parse { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match parse_edge_list("0 99999999999999999999999\n") {
            Err(GdnError::Parse { line: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_graph_rejected() {
        assert!(matches!(parse_edge_list("# nothing\n"), Err(GdnError::EmptyGraph)));
        assert!(matches!(parse_edge_list("nodes 0\n"), Err(GdnError::EmptyGraph)));
    }

    #[test]
    fn edge_list_round_trip() {
        let g = SparseGraph::from_edges(6, [(0, 1), (4, 2), (5, 0)]).unwrap();
        assert_eq!(parse_edge_list(&write_edge_list(&g)).unwrap(), g);
    }

    #[test]
    fn drop_edge_extremes() {
        let g = SparseGraph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(drop_edge(&g, 1.0, &mut rng), g);
        let none = drop_edge(&g, 0.0, &mut rng);
        assert_eq!(none.n_edges(), 0);
        assert_eq!(none.n_nodes(), 5);
        none.check_invariants().unwrap();
    }

    #[test]
    fn drop_edge_binomial_count() {
        // 10,000 edges on a 200-node graph; 99% binomial interval for p = 0.5.
        let mut edges = Vec::new();
        'outer: for u in 0..200 {
            for v in (u + 1)..200 {
                edges.push((u, v));
                if edges.len() == 10_000 {
                    break 'outer;
                }
            }
        }
        let g = SparseGraph::from_edges(200, edges).unwrap();
        assert_eq!(g.n_edges(), 10_000);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let kept = drop_edge(&g, 0.5, &mut rng);
        assert!((4871..=5129).contains(&kept.n_edges()), "{}", kept.n_edges());
        kept.check_invariants().unwrap();

        let again = drop_edge(&g, 0.5, &mut ChaCha8Rng::seed_from_u64(7));
        assert_eq!(kept, again);
    }

    #[test]
    fn drop_rate_semantics() {
        assert_eq!(DropEdgeRate::Keep.keep_prob(0.5), 0.5);
        assert_eq!(DropEdgeRate::Keep.keep_prob(1.0), 1.0);
        assert_eq!(DropEdgeRate::Drop.keep_prob(1.0), 0.0);
    }
}
