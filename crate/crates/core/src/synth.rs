//! Synthetic graphs and datasets, so experiments run without downloads.

use std::sync::Arc;

use ndarray::{Array1, Array2};
use rand::seq::IndexedRandom;
use rand::Rng as _;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{GdnError, Result};
use crate::features::FeatureMatrix;
use crate::graph::SparseGraph;
use crate::laplacian::LaplacianOperator;
use crate::rng::{self, Rng};
use crate::spectral::{eigen_decompose, DEFAULT_ORACLE_LIMIT};

/// `G(n, p)`: each of the `n(n-1)/2` pairs is an edge with probability `p`.
pub fn erdos_renyi(n: usize, p: f64, rng: &mut Rng) -> Result<SparseGraph> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    SparseGraph::from_edges(n, edges)
}

/// Stochastic block model with contiguous blocks. Returns the graph and the
/// block label of every node.
pub fn stochastic_block_model(
    sizes: &[usize],
    p_in: f64,
    p_out: f64,
    rng: &mut Rng,
) -> Result<(SparseGraph, Vec<usize>)> {
    let labels: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &s)| std::iter::repeat_n(b, s))
        .collect();
    let n = labels.len();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if labels[u] == labels[v] { p_in } else { p_out };
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Ok((SparseGraph::from_edges(n, edges)?, labels))
}

/// Nodes uniform in the unit square, joined when closer than `radius`.
pub fn random_geometric(n: usize, radius: f64, rng: &mut Rng) -> Result<SparseGraph> {
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random(), rng.random())).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let (dx, dy) = (pts[u].0 - pts[v].0, pts[u].1 - pts[v].1);
            if dx * dx + dy * dy < radius * radius {
                edges.push((u, v));
            }
        }
    }
    SparseGraph::from_edges(n, edges)
}

/// A graph with node features and (optionally) class labels.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub graph: Arc<SparseGraph>,
    pub features: FeatureMatrix,
    pub labels: Vec<usize>,
}

/// Shape of a citation-network surrogate.
///
/// Nodes fall into `classes` equal blocks, and each block into communities
/// of `community_size` nodes. A node's expected degree is `avg_degree`, of
/// which a `locality` share stays in its community and a `homophily` share
/// (community included) stays in its class. Binary features are Bernoulli
/// draws whose logit is the sum of a class term and a community term, so
/// part of the signal is local to a handful of linked nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CitationSpec {
    pub nodes: usize,
    pub features: usize,
    pub classes: usize,
    pub community_size: usize,
    pub avg_degree: f64,
    pub homophily: f64,
    pub locality: f64,
    /// Standard deviation of the per-class feature logits.
    pub class_scale: f64,
    /// Standard deviation of the per-community feature logits.
    pub community_scale: f64,
}

impl CitationSpec {
    /// Scaled-down Cora shape (7 classes, average degree ≈ 3.9) that trains
    /// in seconds on one core.
    pub const CORA_SMALL: CitationSpec = CitationSpec {
        nodes: 700,
        features: 200,
        classes: 7,
        community_size: 8,
        avg_degree: 3.9,
        homophily: 0.85,
        locality: 0.6,
        class_scale: 1.0,
        community_scale: 1.5,
    };
}

pub fn citation_surrogate(spec: &CitationSpec, seed: u64) -> Result<Dataset> {
    let CitationSpec {
        nodes: n,
        features: d,
        classes: c,
        community_size: cs,
        avg_degree,
        homophily,
        locality,
        class_scale,
        community_scale,
    } = *spec;
    if c == 0 || cs < 2 || n < c * cs || d == 0 || locality > homophily || homophily > 1.0 {
        return Err(GdnError::InvalidArgument(format!("degenerate citation spec {spec:?}")));
    }
    let mut r = rng::stream(seed, rng::DATA);
    let labels: Vec<usize> = (0..n).map(|i| i * c / n).collect();
    // communities are consecutive runs inside each class
    let mut community = vec![0usize; n];
    let mut next = 0;
    for i in 0..n {
        if i > 0 && (labels[i] != labels[i - 1] || (i - first_of(&labels, i)).is_multiple_of(cs)) {
            next += 1;
        }
        community[i] = next;
    }
    let n_comm = next + 1;
    let block = n as f64 / c as f64;
    let p_comm = (locality * avg_degree / (cs as f64 - 1.0)).min(1.0);
    let p_class = ((homophily - locality) * avg_degree / (block - cs as f64)).clamp(0.0, 1.0);
    let p_out = ((1.0 - homophily) * avg_degree / (n as f64 - block)).min(1.0);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if community[u] == community[v] {
                p_comm
            } else if labels[u] == labels[v] {
                p_class
            } else {
                p_out
            };
            if r.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    let graph = SparseGraph::from_edges(n, edges)?;
    let class_logits = Normal::new(0.0, class_scale).expect("finite scale");
    let comm_logits = Normal::new(0.0, community_scale).expect("finite scale");
    let cl = Array2::from_shape_simple_fn((c, d), || class_logits.sample(&mut r));
    let cm = Array2::from_shape_simple_fn((n_comm, d), || comm_logits.sample(&mut r));
    let values = Array2::from_shape_fn((n, d), |(i, j)| {
        let logit = cl[[labels[i], j]] + cm[[community[i], j]];
        let p = 1.0 / (1.0 + (-logit).exp());
        if r.random::<f64>() < p {
            1.0
        } else {
            0.0
        }
    });
    Ok(Dataset {
        graph: Arc::new(graph),
        features: FeatureMatrix::dense(values),
        labels,
    })
}

fn first_of(labels: &[usize], i: usize) -> usize {
    labels[..i].iter().rposition(|&l| l != labels[i]).map_or(0, |p| p + 1)
}

/// Number of Laplacian eigenvectors from each half of the spectrum mixed
/// into a planted signal.
const PLANTED_BAND: usize = 10;

/// Random-geometric graph of `nodes` nodes whose `columns` feature columns
/// each add, with equal energy, a random combination of the lowest-frequency
/// Laplacian eigenvectors and a random combination of eigenvectors drawn
/// uniformly from those with `λ > 1`.
pub fn mixed_frequency_surrogate(nodes: usize, columns: usize, seed: u64) -> Result<Dataset> {
    let mut r = rng::stream(seed, rng::DATA);
    let radius = (8.0 / (std::f64::consts::PI * nodes as f64)).sqrt();
    let graph = Arc::new(random_geometric(nodes, radius, &mut r)?);
    let es = eigen_decompose(&LaplacianOperator::symmetric(graph.clone()), DEFAULT_ORACLE_LIMIT)?;
    let upper: Vec<usize> = (0..nodes).filter(|&k| es.eigenvalues[k] > 1.0).collect();
    let band = PLANTED_BAND.min(upper.len()).min(nodes - upper.len());
    if band == 0 {
        return Err(GdnError::InvalidArgument("graph spectrum has no band above 1".into()));
    }
    let mut values = Array2::zeros((nodes, columns));
    for mut col in values.columns_mut() {
        let mut low = Array1::zeros(nodes);
        let mut high = Array1::zeros(nodes);
        for k in 0..band {
            let a: f64 = StandardNormal.sample(&mut r);
            low.scaled_add(a, &es.eigenvectors.column(k));
        }
        for &k in upper.choose_multiple(&mut r, band) {
            let b: f64 = StandardNormal.sample(&mut r);
            high.scaled_add(b, &es.eigenvectors.column(k));
        }
        let nl = low.dot(&low).sqrt().max(f64::MIN_POSITIVE);
        let nh = high.dot(&high).sqrt().max(f64::MIN_POSITIVE);
        let signal = &low / nl + &high / nh;
        col.assign(&(signal * (nodes as f64 / 2.0).sqrt()));
    }
    Ok(Dataset {
        graph,
        features: FeatureMatrix::dense(values),
        labels: Vec::new(),
    })
}

/// A small labelled graph (e.g. a molecule with atom types).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledGraph {
    pub graph: Arc<SparseGraph>,
    pub labels: Vec<usize>,
}

impl LabeledGraph {
    /// One-hot node features over `n_labels` classes.
    pub fn one_hot(&self, n_labels: usize) -> Array2<f64> {
        let mut x = Array2::zeros((self.labels.len(), n_labels));
        for (i, &l) in self.labels.iter().enumerate() {
            x[[i, l]] = 1.0;
        }
        x
    }
}

/// Atom labels of the molecule surrogate.
pub const MOLECULE_LABELS: usize = 7;
const CARBON: usize = 0;
const NITROGEN: usize = 1;
const OXYGEN: usize = 2;

/// Nitro-aromatic-like molecules: fused six-rings of carbon decorated with
/// nitro groups (N with two O leaves), single O leaves and halogen leaves
/// (labels 3..7). Sizes are uniform in 12..=24 (mean 18). Atom type is
/// informative about degree and position, as in real mutagenicity data.
pub fn molecule_surrogate(count: usize, seed: u64) -> Result<Vec<LabeledGraph>> {
    let mut r = rng::stream(seed, rng::DATA);
    (0..count).map(|_| one_molecule(&mut r)).collect()
}

fn one_molecule(r: &mut Rng) -> Result<LabeledGraph> {
    let target = r.random_range(12..=24usize);
    let mut labels = vec![CARBON; 6];
    let mut edges: Vec<(usize, usize)> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
    let mut degree = vec![2usize; 6];
    let add = |labels: &mut Vec<usize>, degree: &mut Vec<usize>, label: usize| {
        labels.push(label);
        degree.push(0);
        labels.len() - 1
    };
    let link = |edges: &mut Vec<(usize, usize)>, degree: &mut Vec<usize>, u: usize, v: usize| {
        edges.push((u, v));
        degree[u] += 1;
        degree[v] += 1;
    };

    // fuse further rings onto ring edges whose endpoints are both free carbons
    while labels.len() + 4 <= target.saturating_sub(3) && r.random::<f64>() < 0.6 {
        let candidates: Vec<(usize, usize)> = edges
            .iter()
            .copied()
            .filter(|&(u, v)| {
                labels[u] == CARBON && labels[v] == CARBON && degree[u] == 2 && degree[v] == 2
            })
            .collect();
        let Some(&(u, v)) = candidates.choose(r) else { break };
        let new: Vec<usize> = (0..4).map(|_| add(&mut labels, &mut degree, CARBON)).collect();
        link(&mut edges, &mut degree, u, new[0]);
        link(&mut edges, &mut degree, new[0], new[1]);
        link(&mut edges, &mut degree, new[1], new[2]);
        link(&mut edges, &mut degree, new[2], new[3]);
        link(&mut edges, &mut degree, new[3], v);
    }

    // substituents on free ring carbons
    while labels.len() < target {
        let free: Vec<usize> = (0..labels.len())
            .filter(|&i| labels[i] == CARBON && degree[i] == 2)
            .collect();
        let Some(&anchor) = free.choose(r) else { break };
        let roll = r.random::<f64>();
        if roll < 0.45 && labels.len() + 3 <= target {
            let n = add(&mut labels, &mut degree, NITROGEN);
            link(&mut edges, &mut degree, anchor, n);
            for _ in 0..2 {
                let o = add(&mut labels, &mut degree, OXYGEN);
                link(&mut edges, &mut degree, n, o);
            }
        } else if roll < 0.75 {
            let o = add(&mut labels, &mut degree, OXYGEN);
            link(&mut edges, &mut degree, anchor, o);
        } else {
            let halogen = r.random_range(3..MOLECULE_LABELS);
            let h = add(&mut labels, &mut degree, halogen);
            link(&mut edges, &mut degree, anchor, h);
        }
    }
    let graph = SparseGraph::from_edges(labels.len(), edges)?;
    Ok(LabeledGraph {
        graph: Arc::new(graph),
        labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erdos_renyi_density() {
        let g = erdos_renyi(200, 0.05, &mut rng::stream(1, rng::DATA)).unwrap();
        // 19900 pairs, mean 995, sd ≈ 30.7
        assert!((880..=1110).contains(&g.n_edges()), "{}", g.n_edges());
        g.check_invariants().unwrap();
    }

    #[test]
    fn sbm_is_homophilous() {
        let (g, labels) =
            stochastic_block_model(&[50, 50], 0.2, 0.01, &mut rng::stream(2, rng::DATA)).unwrap();
        let inside = g.edges().iter().filter(|&&(u, v)| labels[u] == labels[v]).count();
        assert!(inside as f64 > 0.8 * g.n_edges() as f64);
    }

    #[test]
    fn citation_surrogate_shape_and_determinism() {
        let spec = CitationSpec {
            nodes: 140,
            features: 30,
            ..CitationSpec::CORA_SMALL
        };
        let a = citation_surrogate(&spec, 3).unwrap();
        let b = citation_surrogate(&spec, 3).unwrap();
        assert_eq!(a.features, b.features);
        assert_eq!(*a.graph, *b.graph);
        assert_eq!(a.features.values.dim(), (140, 30));
        assert!(a.features.values.iter().all(|&v| v == 0.0 || v == 1.0));
        let avg = 2.0 * a.graph.n_edges() as f64 / 140.0;
        assert!((2.5..5.5).contains(&avg), "{avg}");
    }

    #[test]
    fn mixed_signal_has_both_bands() {
        let ds = mixed_frequency_surrogate(60, 2, 4).unwrap();
        let es = eigen_decompose(&LaplacianOperator::symmetric(ds.graph.clone()), 100).unwrap();
        let frac = es.energy_fraction_above(ds.features.values.view(), 1.0).unwrap();
        assert!((0.3..0.7).contains(&frac), "{frac}");
    }

    #[test]
    fn molecules_look_like_the_target_corpus() {
        let mols = molecule_surrogate(188, 0).unwrap();
        assert_eq!(mols.len(), 188);
        let avg = mols.iter().map(|m| m.labels.len()).sum::<usize>() as f64 / 188.0;
        assert!((15.0..21.0).contains(&avg), "{avg}");
        for m in &mols {
            m.graph.check_invariants().unwrap();
            assert!(m.labels.iter().all(|&l| l < MOLECULE_LABELS));
            assert!(m.graph.n_edges() >= m.labels.len() - 1);
            for (i, &l) in m.labels.iter().enumerate() {
                if l >= OXYGEN {
                    assert_eq!(m.graph.degree(i), 1);
                }
            }
        }
        assert_eq!(molecule_surrogate(5, 9).unwrap(), molecule_surrogate(5, 9).unwrap());
    }
}
