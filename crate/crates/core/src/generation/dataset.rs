//! Molecule collections.
//!
//! Block format, one block per graph:
//!
//! ```text
//! graph 3
//! 0
//! 2
//! 2
//! 0 1
//! 0 2
//! ```
//!
//! `graph <n>` opens a block, the next `n` lines hold node labels, and the
//! remaining lines up to the next `graph` header are 0-based edges. Blank
//! lines and `#` comments are ignored.

use std::path::Path;
use std::sync::Arc;

use crate::error::{GdnError, Result};
use crate::graph::SparseGraph;
use crate::synth::LabeledGraph;

fn parse_err(line: usize, message: impl Into<String>) -> GdnError {
    GdnError::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse_molecules(text: &str) -> Result<Vec<LabeledGraph>> {
    struct Block {
        n: usize,
        labels: Vec<usize>,
        edges: Vec<(usize, usize)>,
        header_line: usize,
    }
    let finish = |b: Block| -> Result<LabeledGraph> {
        if b.labels.len() != b.n {
            return Err(parse_err(b.header_line, format!("expected {} labels, found {}", b.n, b.labels.len())));
        }
        let graph = SparseGraph::from_edges(b.n, b.edges).map_err(|e| match e {
            GdnError::SelfLoop { node, .. } => parse_err(b.header_line, format!("self-loop at node {node}")),
            other => other,
        })?;
        Ok(LabeledGraph {
            graph: Arc::new(graph),
            labels: b.labels,
        })
    };

    let mut out = Vec::new();
    let mut cur: Option<Block> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks[0] == "graph" {
            if let Some(b) = cur.take() {
                out.push(finish(b)?);
            }
            let n = toks
                .get(1)
                .and_then(|t| t.parse::<usize>().ok())
                .filter(|&n| n > 0 && toks.len() == 2)
                .ok_or_else(|| parse_err(line_no, "expected 'graph <node count>'"))?;
            cur = Some(Block {
                n,
                labels: Vec::with_capacity(n),
                edges: Vec::new(),
                header_line: line_no,
            });
            continue;
        }
        let b = cur.as_mut().ok_or_else(|| parse_err(line_no, "data before the first 'graph' header"))?;
        let nums: Option<Vec<usize>> = toks.iter().map(|t| t.parse().ok()).collect();
        let nums = nums.ok_or_else(|| parse_err(line_no, "expected non-negative integers"))?;
        if b.labels.len() < b.n {
            if nums.len() != 1 {
                return Err(parse_err(line_no, "expected a single node label"));
            }
            b.labels.push(nums[0]);
        } else {
            if nums.len() != 2 {
                return Err(parse_err(line_no, "expected an edge 'u v'"));
            }
            if nums[0] >= b.n || nums[1] >= b.n {
                return Err(parse_err(line_no, format!("edge endpoint outside 0..{}", b.n)));
            }
            if nums[0] == nums[1] {
                return Err(parse_err(line_no, format!("self-loop at node {}", nums[0])));
            }
            b.edges.push((nums[0], nums[1]));
        }
    }
    if let Some(b) = cur.take() {
        out.push(finish(b)?);
    }
    if out.is_empty() {
        return Err(GdnError::EmptyGraph);
    }
    Ok(out)
}

pub fn load_molecules(path: impl AsRef<Path>) -> Result<Vec<LabeledGraph>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| GdnError::io(path, e))?;
    parse_molecules(&text)
}

pub fn write_molecules(graphs: &[LabeledGraph]) -> String {
    let mut out = String::new();
    for g in graphs {
        out.push_str(&format!("graph {}\n", g.labels.len()));
        for l in &g.labels {
            out.push_str(&format!("{l}\n"));
        }
        for &(u, v) in g.graph.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
    }
    out
}

/// Reads a TU-format dataset (`<name>_A.txt`, `<name>_graph_indicator.txt`,
/// `<name>_node_labels.txt` in `dir`). Node and graph ids are 1-based in
/// those files; labels are shifted so the smallest becomes 0. Edge
/// attributes such as bond types are ignored.
pub fn load_tu_dataset(dir: impl AsRef<Path>, name: &str) -> Result<Vec<LabeledGraph>> {
    let dir = dir.as_ref();
    let read = |suffix: &str| -> Result<String> {
        let p = dir.join(format!("{name}_{suffix}.txt"));
        std::fs::read_to_string(&p).map_err(|e| GdnError::io(&p, e))
    };
    let ints = |text: &str, what: &str| -> Result<Vec<Vec<i64>>> {
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                l.split(',')
                    .map(|t| t.trim().parse::<i64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| parse_err(i + 1, format!("bad integer in {what}")))
            })
            .collect()
    };
    let indicator: Vec<usize> = ints(&read("graph_indicator")?, "graph indicator")?
        .into_iter()
        .map(|r| r[0].max(1) as usize - 1)
        .collect();
    let raw_labels: Vec<i64> = ints(&read("node_labels")?, "node labels")?.into_iter().map(|r| r[0]).collect();
    if raw_labels.len() != indicator.len() {
        return Err(GdnError::shape("node labels", indicator.len(), raw_labels.len()));
    }
    let min_label = raw_labels.iter().copied().min().unwrap_or(0);
    let n_graphs = indicator.iter().copied().max().map_or(0, |m| m + 1);
    // position of every node within its graph
    let mut offset = vec![0usize; n_graphs];
    let mut local = Vec::with_capacity(indicator.len());
    let mut labels = vec![Vec::new(); n_graphs];
    for (node, &g) in indicator.iter().enumerate() {
        local.push(offset[g]);
        offset[g] += 1;
        labels[g].push((raw_labels[node] - min_label) as usize);
    }
    let mut edges = vec![Vec::new(); n_graphs];
    for (i, row) in ints(&read("A")?, "adjacency")?.into_iter().enumerate() {
        if row.len() != 2 || row[0] < 1 || row[1] < 1 {
            return Err(parse_err(i + 1, "expected 'u, v' with 1-based ids"));
        }
        let (u, v) = (row[0] as usize - 1, row[1] as usize - 1);
        if u >= indicator.len() || v >= indicator.len() || indicator[u] != indicator[v] {
            return Err(parse_err(i + 1, "edge joins unknown nodes or different graphs"));
        }
        if u != v {
            edges[indicator[u]].push((local[u], local[v]));
        }
    }
    labels
        .into_iter()
        .zip(edges)
        .map(|(l, e)| {
            Ok(LabeledGraph {
                graph: Arc::new(SparseGraph::from_edges(l.len(), e)?),
                labels: l,
            })
        })
        .collect()
}
