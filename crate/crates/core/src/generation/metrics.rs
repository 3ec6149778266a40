//! Edge-reconstruction metrics over all unordered node pairs.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::model::{edge_probability, logistic, LOGIT_CLAMP};
use crate::graph::SparseGraph;

/// Scores sorted descending, grouped into runs of equal score, as
/// `(positives, negatives)` per run.
fn tie_groups(scores: &[f64], labels: &[bool]) -> Vec<(u64, u64)> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut groups: Vec<(u64, u64)> = Vec::new();
    let mut last = None;
    for i in idx {
        if last != Some(scores[i]) {
            groups.push((0, 0));
            last = Some(scores[i]);
        }
        let g = groups.last_mut().expect("pushed above");
        if labels[i] {
            g.0 += 1;
        } else {
            g.1 += 1;
        }
    }
    groups
}

/// Probability that a random positive outranks a random negative, ties
/// counting one half, by exact pair counting. `None` without both classes.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Option<f64> {
    let groups = tie_groups(scores, labels);
    let pos: u64 = groups.iter().map(|g| g.0).sum();
    let neg: u64 = groups.iter().map(|g| g.1).sum();
    if pos == 0 || neg == 0 {
        return None;
    }
    // twice the number of (positive, negative) wins, counting ties once
    let mut twice_wins: u128 = 0;
    let mut neg_below = neg;
    for &(p, q) in &groups {
        neg_below -= q;
        twice_wins += 2 * p as u128 * neg_below as u128 + p as u128 * q as u128;
    }
    Some(twice_wins as f64 / (2 * pos as u128 * neg as u128) as f64)
}

/// Average precision `Σ_k (R_k − R_{k−1}) P_k` with one threshold per
/// distinct score. `None` without positives.
pub fn average_precision(scores: &[f64], labels: &[bool]) -> Option<f64> {
    let groups = tie_groups(scores, labels);
    let pos: u64 = groups.iter().map(|g| g.0).sum();
    if pos == 0 {
        return None;
    }
    let (mut tp, mut seen, mut ap) = (0u64, 0u64, 0.0);
    for &(p, q) in &groups {
        tp += p;
        seen += p + q;
        ap += (p as f64 / pos as f64) * (tp as f64 / seen as f64);
    }
    Some(ap)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeMetrics {
    /// Mean over unordered pairs of `log p(A_ij | Z)`.
    pub log_lik: Option<f64>,
    pub auc: Option<f64>,
    pub ap: Option<f64>,
}

/// Metrics of the inner-product decoder on one graph. Pairs are generated
/// on demand; no `n × n` matrix is formed.
pub fn edge_metrics(graph: &SparseGraph, z: ArrayView2<f64>) -> EdgeMetrics {
    let n = graph.n_nodes();
    let mut scores = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    let mut labels = Vec::with_capacity(scores.capacity());
    let mut ll = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let p = edge_probability(z, i, j);
            let edge = graph.has_edge(i, j);
            // log p and log(1 - p) from the clamped logit, stable for p near 0 or 1
            let s = z.row(i).dot(&z.row(j)).clamp(-LOGIT_CLAMP, LOGIT_CLAMP);
            ll += if edge { logistic(s).ln() } else { logistic(-s).ln() };
            scores.push(p);
            labels.push(edge);
        }
    }
    let pairs = scores.len();
    EdgeMetrics {
        log_lik: (pairs > 0).then(|| ll / pairs as f64),
        auc: roc_auc(&scores, &labels),
        ap: average_precision(&scores, &labels),
    }
}
