//! Normalized Laplacian operators applied by sparse row traversal.

use std::sync::Arc;

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{GdnError, Result};
use crate::graph::SparseGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `L = I' - D^{-1/2} A D^{-1/2}`.
    #[default]
    Symmetric,
    /// `L = I' - D^{-1} A` (row normalized).
    Left,
}

/// A normalized Laplacian of a [`SparseGraph`].
///
/// `I'` above is the identity restricted to nodes of nonzero degree, so
/// isolated nodes give zero rows and columns. With `self_loops` the
/// adjacency is first augmented to `A + I`, every degree is at least one and
/// `I'` is the full identity.
#[derive(Debug, Clone)]
pub struct LaplacianOperator {
    graph: Arc<SparseGraph>,
    kind: Normalization,
    self_loops: bool,
    /// `deg^{-1/2}` (symmetric) or `deg^{-1}` (left); 0.0 for isolated nodes.
    scale: Vec<f64>,
}

impl LaplacianOperator {
    pub fn new(graph: Arc<SparseGraph>, kind: Normalization, self_loops: bool) -> Self {
        let scale = (0..graph.n_nodes())
            .map(|i| {
                let d = graph.degree(i) as f64 + if self_loops { 1.0 } else { 0.0 };
                if d == 0.0 {
                    0.0
                } else {
                    match kind {
                        Normalization::Symmetric => 1.0 / d.sqrt(),
                        Normalization::Left => 1.0 / d,
                    }
                }
            })
            .collect();
        LaplacianOperator {
            graph,
            kind,
            self_loops,
            scale,
        }
    }

    /// Symmetric normalization without self-loops.
    pub fn symmetric(graph: Arc<SparseGraph>) -> Self {
        Self::new(graph, Normalization::Symmetric, false)
    }

    pub fn graph(&self) -> &SparseGraph {
        &self.graph
    }

    pub fn graph_arc(&self) -> &Arc<SparseGraph> {
        &self.graph
    }

    pub fn kind(&self) -> Normalization {
        self.kind
    }

    pub fn self_loops(&self) -> bool {
        self.self_loops
    }

    pub fn n_nodes(&self) -> usize {
        self.graph.n_nodes()
    }

    pub fn is_symmetric(&self) -> bool {
        self.kind == Normalization::Symmetric
    }

    /// Same normalization on a different graph (e.g. after DropEdge).
    pub fn with_graph(&self, graph: Arc<SparseGraph>) -> Self {
        Self::new(graph, self.kind, self.self_loops)
    }

    fn active(&self, i: usize) -> f64 {
        if self.self_loops || self.graph.degree(i) > 0 {
            1.0
        } else {
            0.0
        }
    }

    fn check_rows(&self, x: &ArrayView2<f64>) -> Result<()> {
        if x.nrows() != self.n_nodes() {
            return Err(GdnError::shape("laplacian_apply", self.n_nodes(), x.nrows()));
        }
        Ok(())
    }

    /// Normalized adjacency product `N x` where `L = I' - N`.
    fn adjacency_apply(&self, x: ArrayView2<f64>, transpose: bool) -> Array2<f64> {
        let g = &*self.graph;
        let n = g.n_nodes();
        let d = x.ncols();
        let x = x.as_standard_layout();
        let xs = x.as_slice().expect("standard layout");
        let mut out = Array2::<f64>::zeros((n, d));
        let os = out.as_slice_mut().expect("fresh array");

        // weight of entry (i, j) of N, for A_ij = 1
        let weight = |i: usize, j: usize| -> f64 {
            match (self.kind, transpose) {
                (Normalization::Symmetric, _) => self.scale[i] * self.scale[j],
                (Normalization::Left, false) => self.scale[i],
                (Normalization::Left, true) => self.scale[j],
            }
        };
        for i in 0..n {
            let row = &mut os[i * d..(i + 1) * d];
            if self.self_loops {
                let w = weight(i, i);
                let src = &xs[i * d..(i + 1) * d];
                row.iter_mut().zip(src).for_each(|(o, s)| *o += w * s);
            }
            for &j in g.neighbors(i) {
                let w = weight(i, j);
                let src = &xs[j * d..(j + 1) * d];
                row.iter_mut().zip(src).for_each(|(o, s)| *o += w * s);
            }
        }
        out
    }

    /// `L x`, column by column, without materializing `L`.
    pub fn apply(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_rows(&x)?;
        Ok(self.laplacian_from(x, false))
    }

    /// `Lᵀ x`; identical to [`apply`](Self::apply) for the symmetric kind.
    pub fn apply_transpose(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_rows(&x)?;
        Ok(self.laplacian_from(x, true))
    }

    fn laplacian_from(&self, x: ArrayView2<f64>, transpose: bool) -> Array2<f64> {
        let mut out = self.adjacency_apply(x.view(), transpose);
        out.mapv_inplace(|v| -v);
        for (i, (mut o, xi)) in out.axis_iter_mut(Axis(0)).zip(x.axis_iter(Axis(0))).enumerate() {
            let a = self.active(i);
            if a != 0.0 {
                o.scaled_add(a, &xi);
            }
        }
        out
    }

    /// GCN propagation `P x = (I - L) x`, whose spectral response is `1 - λ`.
    pub fn propagate(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_rows(&x)?;
        let mut lx = self.laplacian_from(x.view(), false);
        lx.mapv_inplace(|v| -v);
        lx += &x;
        Ok(lx)
    }

    /// `Pᵀ x`.
    pub fn propagate_transpose(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_rows(&x)?;
        let mut lx = self.laplacian_from(x.view(), true);
        lx.mapv_inplace(|v| -v);
        lx += &x;
        Ok(lx)
    }

    /// Dense `L`, for oracles on small graphs.
    pub fn to_dense(&self) -> Array2<f64> {
        let n = self.n_nodes();
        self.laplacian_from(Array2::<f64>::eye(n).view(), false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn k2() -> Arc<SparseGraph> {
        Arc::new(SparseGraph::from_edges(2, [(0, 1)]).unwrap())
    }

    fn p3() -> Arc<SparseGraph> {
        Arc::new(SparseGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap())
    }

    #[test]
    fn k2_matches_hand_built_laplacian() {
        let op = LaplacianOperator::symmetric(k2());
        let y = op.apply(array![[1.0], [0.0]].view()).unwrap();
        assert_abs_diff_eq!(y, array![[1.0], [-1.0]], epsilon = 1e-15);
        assert_abs_diff_eq!(op.to_dense(), array![[1.0, -1.0], [-1.0, 1.0]], epsilon = 1e-15);
    }

    #[test]
    fn sqrt_degree_is_in_kernel() {
        let g = Arc::new(
            SparseGraph::from_edges(6, [(0, 1), (0, 2), (0, 3), (3, 4), (4, 5), (2, 5)]).unwrap(),
        );
        let op = LaplacianOperator::symmetric(g.clone());
        let x = Array2::from_shape_fn((6, 1), |(i, _)| (g.degree(i) as f64).sqrt());
        let y = op.apply(x.view()).unwrap();
        assert!(y.iter().all(|v| v.abs() < 1e-14), "{y:?}");
    }

    #[test]
    fn p3_eigenvector_at_one() {
        let op = LaplacianOperator::symmetric(p3());
        let y = op.apply(array![[1.0], [0.0], [-1.0]].view()).unwrap();
        assert_abs_diff_eq!(y, array![[1.0], [0.0], [-1.0]], epsilon = 1e-15);
    }

    #[test]
    fn isolated_nodes_are_zero_rows() {
        let g = Arc::new(SparseGraph::from_edges(4, [(0, 1)]).unwrap());
        let op = LaplacianOperator::symmetric(g);
        let dense = op.to_dense();
        for k in 0..4 {
            assert_eq!(dense[[2, k]], 0.0);
            assert_eq!(dense[[k, 3]], 0.0);
        }
        let y = op.apply(array![[1.0], [2.0], [5.0], [0.0]].view()).unwrap();
        assert_eq!(y[[2, 0]], 0.0);
        assert_eq!(y[[3, 0]], 0.0);
        // propagation is the identity on isolated nodes
        let p = op.propagate(array![[1.0], [2.0], [5.0], [7.0]].view()).unwrap();
        assert_eq!(p[[2, 0]], 5.0);
        assert_eq!(p[[3, 0]], 7.0);
    }

    #[test]
    fn dimension_mismatch() {
        let op = LaplacianOperator::symmetric(k2());
        assert!(matches!(
            op.apply(Array2::zeros((3, 1)).view()),
            Err(GdnError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn left_normalization_and_transpose() {
        let g = p3();
        let op = LaplacianOperator::new(g.clone(), Normalization::Left, false);
        // D^{-1} A rows sum to one, so constants are in the kernel of L_left
        let y = op.apply(Array2::ones((3, 1)).view()).unwrap();
        assert!(y.iter().all(|v| v.abs() < 1e-15));
        let dense = op.to_dense();
        let dense_t = op.apply_transpose(Array2::<f64>::eye(3).view()).unwrap();
        assert_abs_diff_eq!(dense.t().to_owned(), dense_t, epsilon = 1e-15);
        let p = op.propagate(Array2::<f64>::eye(3).view()).unwrap();
        let pt = op.propagate_transpose(Array2::<f64>::eye(3).view()).unwrap();
        assert_abs_diff_eq!(p.t().to_owned(), pt, epsilon = 1e-15);
    }

    #[test]
    fn self_loop_renormalization() {
        let op = LaplacianOperator::new(k2(), Normalization::Symmetric, true);
        // Ã = [[1,1],[1,1]], D̃ = 2I → L = I - Ã/2
        assert_abs_diff_eq!(op.to_dense(), array![[0.5, -0.5], [-0.5, 0.5]], epsilon = 1e-15);
    }
}
