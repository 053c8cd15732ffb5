//! Directed attributed graphs and the augmented adjacency consumed by the
//! convolution branches.
//!
//! A graph stores its adjacency twice in compressed-row form: once by source
//! (row `i` lists the out-neighbours of `i`) and once by target (row `i`
//! lists the in-neighbours). Storage is `O(|E| + n·F)`; nothing here ever
//! allocates an `n × n` dense matrix.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, SparseMatrix};

/// Class index of a node, or `None` when unlabeled.
pub type Label = Option<usize>;

#[derive(Debug, Clone, PartialEq)]
pub struct DirectedAttributedGraph {
    out_adj: SparseMatrix,
    in_adj: SparseMatrix,
    attributes: Arc<DenseMatrix>,
    labels: Vec<Label>,
    num_classes: usize,
    weighted: bool,
}

impl DirectedAttributedGraph {
    /// Builds a binary-weight graph, silently dropping duplicate edges.
    ///
    /// `n` is the label vector length; every edge endpoint must be below it
    /// and the attribute matrix must have `n` rows.
    pub fn new(
        edges: &[(usize, usize)],
        attributes: DenseMatrix,
        labels: Vec<Label>,
    ) -> Result<Self> {
        Self::build(
            edges.iter().map(|&(s, d)| (s, d, 1.0)),
            attributes,
            labels,
            false,
        )
    }

    /// General constructor. With `strict` set, a repeated directed edge is an
    /// error; otherwise the first occurrence wins.
    pub fn build(
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
        attributes: DenseMatrix,
        labels: Vec<Label>,
        strict: bool,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::dims("graph node count", "at least 1", 0));
        }
        if attributes.rows() != n {
            return Err(Error::dims("attribute rows", n, attributes.rows()));
        }
        let mut list: Vec<(usize, usize, f64)> = Vec::new();
        let mut weighted = false;
        for (s, d, w) in edges {
            if s >= n || d >= n {
                return Err(Error::InvalidEdge { src: s, dst: d, n });
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "edge ({s}, {d}) has weight {w}; weights must be finite and non-negative"
                )));
            }
            weighted |= w != 1.0;
            list.push((s, d, w));
        }
        list.sort_by_key(|&(s, d, _)| (s, d));
        let mut deduped: Vec<(usize, usize, f64)> = Vec::with_capacity(list.len());
        for e in list {
            match deduped.last() {
                Some(&(s, d, _)) if s == e.0 && d == e.1 => {
                    if strict {
                        return Err(Error::DuplicateEdge { src: s, dst: d });
                    }
                }
                _ => deduped.push(e),
            }
        }
        let out_adj = SparseMatrix::from_triplets(n, n, deduped)?;
        let in_adj = out_adj.transpose();
        let num_classes = labels.iter().flatten().max().map_or(0, |&m| m + 1);
        Ok(DirectedAttributedGraph {
            out_adj,
            in_adj,
            attributes: Arc::new(attributes),
            labels,
            num_classes,
            weighted,
        })
    }

    #[inline]
    pub fn num_nodes(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn num_edges(&self) -> usize {
        self.out_adj.nnz()
    }

    pub fn num_features(&self) -> usize {
        self.attributes.cols()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn attributes(&self) -> &DenseMatrix {
        &self.attributes
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    /// The raw adjacency `A`, rows indexed by source node.
    pub fn adjacency(&self) -> &SparseMatrix {
        &self.out_adj
    }

    fn check_node(&self, i: usize) -> Result<()> {
        if i >= self.num_nodes() {
            return Err(Error::InvalidNode {
                node: i,
                n: self.num_nodes(),
            });
        }
        Ok(())
    }

    /// `{ j | (i, j) ∈ E }`, sorted ascending.
    pub fn out_neighbors(&self, i: usize) -> Result<&[usize]> {
        self.check_node(i)?;
        Ok(self.out_adj.row_indices(i))
    }

    /// `{ j | (j, i) ∈ E }`, sorted ascending.
    pub fn in_neighbors(&self, i: usize) -> Result<&[usize]> {
        self.check_node(i)?;
        Ok(self.in_adj.row_indices(i))
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.num_nodes() && j < self.num_nodes() && self.out_adj.contains(i, j)
    }

    /// Edges in (source, target) lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out_adj.iter().map(|(s, d, _)| (s, d))
    }

    pub fn weighted_edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.out_adj.iter()
    }

    /// Same nodes, attributes and labels with a different edge set.
    pub fn with_edges(&self, edges: &[(usize, usize)]) -> Result<Self> {
        let weights = edges
            .iter()
            .map(|&(s, d)| (s, d, if self.has_edge(s, d) { self.out_adj.get(s, d) } else { 1.0 }));
        let mut g = Self::build(weights, DenseMatrix::zeros(self.num_nodes(), 0), self.labels.clone(), false)?;
        g.attributes = Arc::clone(&self.attributes);
        Ok(g)
    }

    /// Every edge flipped: `(i, j)` becomes `(j, i)`.
    pub fn reversed(&self) -> Self {
        DirectedAttributedGraph {
            out_adj: self.in_adj.clone(),
            in_adj: self.out_adj.clone(),
            attributes: Arc::clone(&self.attributes),
            labels: self.labels.clone(),
            num_classes: self.num_classes,
            weighted: self.weighted,
        }
    }

    /// Same structure with a replacement label vector.
    pub fn with_labels(&self, labels: Vec<Label>) -> Result<Self> {
        if labels.len() != self.num_nodes() {
            return Err(Error::dims("label vector", self.num_nodes(), labels.len()));
        }
        let num_classes = labels.iter().flatten().max().map_or(0, |&m| m + 1);
        Ok(DirectedAttributedGraph {
            labels,
            num_classes,
            ..self.clone()
        })
    }

    pub fn self_loop_count(&self) -> usize {
        (0..self.num_nodes())
            .filter(|&i| self.out_adj.contains(i, i))
            .count()
    }
}

/// `Â = A + Iₙ`, or its transpose when `is_transposed` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedAdjacency {
    pub matrix: SparseMatrix,
    pub is_transposed: bool,
}

impl AugmentedAdjacency {
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn transpose(&self) -> AugmentedAdjacency {
        AugmentedAdjacency {
            matrix: self.matrix.transpose(),
            is_transposed: !self.is_transposed,
        }
    }

    /// Row-stochastic variant of the same pattern.
    pub fn row_normalized(&self) -> AugmentedAdjacency {
        AugmentedAdjacency {
            matrix: self.matrix.row_normalized(),
            is_transposed: self.is_transposed,
        }
    }
}

/// Adds self-connections. A pre-existing self-loop keeps the diagonal at 1.
pub fn augment_with_self_loops(g: &DirectedAttributedGraph) -> AugmentedAdjacency {
    let n = g.num_nodes();
    let a = g.adjacency();
    let mut offsets = Vec::with_capacity(n + 1);
    let mut indices = Vec::with_capacity(a.nnz() + n);
    let mut values = Vec::with_capacity(a.nnz() + n);
    offsets.push(0);
    for i in 0..n {
        let mut diag_done = false;
        for (&j, &w) in a.row_indices(i).iter().zip(a.row_values(i)) {
            if !diag_done && j >= i {
                indices.push(i);
                values.push(1.0);
                diag_done = true;
                if j == i {
                    continue;
                }
            }
            indices.push(j);
            values.push(w);
        }
        if !diag_done {
            indices.push(i);
            values.push(1.0);
        }
        offsets.push(indices.len());
    }
    let matrix = SparseMatrix::from_csr(n, n, offsets, indices, values)
        .expect("augmented adjacency preserves CSR invariants");
    AugmentedAdjacency {
        matrix,
        is_transposed: false,
    }
}

/// Free-function form of [`AugmentedAdjacency::transpose`].
pub fn transpose(adj: &AugmentedAdjacency) -> AugmentedAdjacency {
    adj.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn path3() -> DirectedAttributedGraph {
        DirectedAttributedGraph::new(&[(0, 1), (1, 2)], DenseMatrix::zeros(3, 1), vec![None; 3])
            .unwrap()
    }

    fn random_graph(n: usize, m: usize, seed: u64) -> (DirectedAttributedGraph, Vec<(usize, usize)>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let edges: Vec<_> = (0..m)
            .map(|_| (rng.random_range(0..n), rng.random_range(0..n)))
            .collect();
        let g = DirectedAttributedGraph::new(&edges, DenseMatrix::zeros(n, 2), vec![Some(0); n]).unwrap();
        (g, edges)
    }

    #[test]
    fn minimal_and_edgeless_graphs() {
        let attrs = DenseMatrix::from_rows(&[[1.0], [0.0]]).unwrap();
        let g = DirectedAttributedGraph::new(&[(0, 1)], attrs, vec![Some(0), Some(1)]).unwrap();
        assert_eq!(g.num_nodes(), 2);
        assert_eq!(g.num_edges(), 1);
        assert_eq!(g.num_classes(), 2);

        let e = DirectedAttributedGraph::new(&[], DenseMatrix::zeros(3, 2), vec![None; 3]).unwrap();
        assert_eq!(e.num_edges(), 0);
        assert_eq!(e.num_classes(), 0);
    }

    #[test]
    fn construction_errors() {
        let bad_rows = DirectedAttributedGraph::new(&[], DenseMatrix::zeros(2, 1), vec![None; 3]);
        assert!(matches!(bad_rows, Err(Error::DimensionMismatch { .. })));
        let bad_edge = DirectedAttributedGraph::new(&[(0, 5)], DenseMatrix::zeros(3, 1), vec![None; 3]);
        assert!(matches!(bad_edge, Err(Error::InvalidEdge { dst: 5, .. })));
        let dup = DirectedAttributedGraph::build(
            [(0, 1, 1.0), (0, 1, 1.0)],
            DenseMatrix::zeros(2, 1),
            vec![None; 2],
            true,
        );
        assert!(matches!(dup, Err(Error::DuplicateEdge { src: 0, dst: 1 })));
        let merged = DirectedAttributedGraph::new(&[(0, 1), (0, 1), (1, 0)], DenseMatrix::zeros(2, 1), vec![None; 2])
            .unwrap();
        assert_eq!(merged.num_edges(), 2);
    }

    #[test]
    fn path_neighbors() {
        let g = path3();
        assert_eq!(g.out_neighbors(0).unwrap(), &[1]);
        assert!(g.out_neighbors(2).unwrap().is_empty());
        assert!(g.in_neighbors(0).unwrap().is_empty());
        assert_eq!(g.in_neighbors(1).unwrap(), &[0]);
        assert!(matches!(g.out_neighbors(3), Err(Error::InvalidNode { node: 3, n: 3 })));
        assert!(g.in_neighbors(7).is_err());
    }

    #[test]
    fn neighbors_match_edge_scan() {
        let (g, edges) = random_graph(50, 300, 11);
        let mut degree_total = 0;
        for i in 0..50 {
            let out: BTreeSet<usize> = edges.iter().filter(|e| e.0 == i).map(|e| e.1).collect();
            let inn: BTreeSet<usize> = edges.iter().filter(|e| e.1 == i).map(|e| e.0).collect();
            assert_eq!(g.out_neighbors(i).unwrap().iter().copied().collect::<BTreeSet<_>>(), out);
            assert_eq!(g.in_neighbors(i).unwrap().iter().copied().collect::<BTreeSet<_>>(), inn);
            degree_total += out.len() + inn.len();
        }
        assert_eq!(degree_total, 2 * g.num_edges());
    }

    #[test]
    fn augmentation_small_cases() {
        let g = DirectedAttributedGraph::new(&[(0, 1)], DenseMatrix::zeros(2, 1), vec![None; 2]).unwrap();
        let a = augment_with_self_loops(&g);
        let nz: Vec<_> = a.matrix.iter().map(|(r, c, _)| (r, c)).collect();
        assert_eq!(nz, vec![(0, 0), (0, 1), (1, 1)]);

        let e = DirectedAttributedGraph::new(&[], DenseMatrix::zeros(3, 1), vec![None; 3]).unwrap();
        assert_eq!(augment_with_self_loops(&e).matrix, SparseMatrix::identity(3));
    }

    #[test]
    fn self_loops_are_not_doubled() {
        let g = DirectedAttributedGraph::new(&[(1, 1), (1, 0), (0, 2)], DenseMatrix::zeros(3, 1), vec![None; 3])
            .unwrap();
        let a = augment_with_self_loops(&g);
        assert_eq!(a.matrix.get(1, 1), 1.0);
        assert_eq!(a.matrix.nnz(), g.num_edges() + 3 - g.self_loop_count());
    }

    #[test]
    fn augmentation_matches_dense_a_plus_i() {
        let (g, edges) = random_graph(100, 600, 12);
        let a = augment_with_self_loops(&g);
        let dense = a.matrix.to_dense();
        for i in 0..100 {
            for j in 0..100 {
                let expected = if i == j || edges.contains(&(i, j)) { 1.0 } else { 0.0 };
                assert_eq!(dense.get(i, j), expected);
            }
            // row i enumerates out-neighbours ∪ {i}; column i in-neighbours ∪ {i}
            let mut row: BTreeSet<usize> = g.out_neighbors(i).unwrap().iter().copied().collect();
            row.insert(i);
            assert_eq!(a.matrix.row_indices(i).iter().copied().collect::<BTreeSet<_>>(), row);
        }
        assert_eq!(a.matrix.nnz(), g.num_edges() + 100 - g.self_loop_count());
    }

    #[test]
    fn transpose_cases() {
        let e = DirectedAttributedGraph::new(&[], DenseMatrix::zeros(4, 1), vec![None; 4]).unwrap();
        let id = augment_with_self_loops(&e);
        assert_eq!(transpose(&id).matrix, id.matrix);

        let g = DirectedAttributedGraph::new(&[(0, 1)], DenseMatrix::zeros(2, 1), vec![None; 2]).unwrap();
        let t = transpose(&augment_with_self_loops(&g));
        assert!(t.is_transposed);
        let nz: Vec<_> = t.matrix.iter().map(|(r, c, _)| (r, c)).collect();
        assert_eq!(nz, vec![(0, 0), (1, 0), (1, 1)]);

        // augmenting then transposing equals augmenting the reversed graph
        let (r, _) = random_graph(40, 200, 13);
        let lhs = transpose(&augment_with_self_loops(&r));
        let rhs = augment_with_self_loops(&r.reversed());
        assert_eq!(lhs.matrix, rhs.matrix);
        assert_eq!(lhs.transpose().matrix, augment_with_self_loops(&r).matrix);
    }

    #[test]
    fn with_edges_keeps_nodes_and_attributes() {
        let (g, _) = random_graph(30, 100, 14);
        let kept: Vec<_> = g.edges().take(10).collect();
        let h = g.with_edges(&kept).unwrap();
        assert_eq!(h.num_nodes(), 30);
        assert_eq!(h.num_edges(), 10);
        assert_eq!(h.attributes(), g.attributes());
    }
}
