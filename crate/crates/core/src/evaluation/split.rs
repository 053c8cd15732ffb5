use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::DirectedAttributedGraph;

/// A uniform random partition of the edge set into training and held-out
/// edges. Both lists are sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSplit {
    pub train_edges: Vec<(usize, usize)>,
    pub test_edges: Vec<(usize, usize)>,
    pub ratio: f64,
    pub seed: u64,
}

impl EdgeSplit {
    /// The graph with the held-out edges removed; nodes, attributes and
    /// labels are kept.
    pub fn train_graph(&self, g: &DirectedAttributedGraph) -> Result<DirectedAttributedGraph> {
        g.with_edges(&self.train_edges)
    }
}

/// Holds out `round(ratio · |E|)` edges chosen uniformly by a seeded shuffle.
pub fn split_edges(g: &DirectedAttributedGraph, ratio: f64, seed: u64) -> Result<EdgeSplit> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidConfig(format!("holdout ratio must be in (0, 1), got {ratio}")));
    }
    let mut edges: Vec<_> = g.edges().collect();
    let num_test = (ratio * edges.len() as f64).round() as usize;
    if num_test == 0 {
        return Err(Error::TooFewEdges {
            edges: edges.len(),
            ratio,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    edges.shuffle(&mut rng);
    let mut test_edges = edges.split_off(edges.len() - num_test);
    let mut train_edges = edges;
    train_edges.sort_unstable();
    test_edges.sort_unstable();
    Ok(EdgeSplit {
        train_edges,
        test_edges,
        ratio,
        seed,
    })
}
