use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, StandardNormal};

use crate::error::{Error, Result};
use crate::graph::DirectedAttributedGraph;
use crate::linalg::DenseMatrix;

/// A directed stochastic block model with Gaussian class-dependent
/// attributes.
///
/// Nodes are split into contiguous, near-equal communities; the community
/// is the node's label. Each ordered pair `(i, j)`, `i ≠ j`, is an edge
/// independently with probability `intra_prob` inside a community and
/// `inter_prob` across. With `one_way_inter` cross-community edges only go
/// from a lower-numbered community to a higher one.
///
/// Attributes are standard normal noise plus a class mean. Class `c` has
/// mean `signal / √2` on feature `c mod F`, so two class means sit
/// `signal` apart when `F ≥ num_communities`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub num_nodes: usize,
    pub num_communities: usize,
    pub intra_prob: f64,
    pub inter_prob: f64,
    pub num_features: usize,
    pub signal: f64,
    pub one_way_inter: bool,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            num_nodes: 200,
            num_communities: 2,
            intra_prob: 0.1,
            inter_prob: 0.01,
            num_features: 16,
            signal: 3.0,
            one_way_inter: false,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let prob_ok = |p: f64| (0.0..=1.0).contains(&p);
        if !prob_ok(self.intra_prob) || !prob_ok(self.inter_prob) {
            return Err(Error::InvalidConfig("edge probabilities must lie in [0, 1]".into()));
        }
        if self.num_communities == 0 || self.num_nodes < self.num_communities {
            return Err(Error::InvalidConfig(format!(
                "need 1 ≤ communities ≤ nodes, got {} communities for {} nodes",
                self.num_communities, self.num_nodes
            )));
        }
        if self.num_features == 0 {
            return Err(Error::InvalidConfig("num_features must be positive".into()));
        }
        if !self.signal.is_finite() {
            return Err(Error::InvalidConfig("signal must be finite".into()));
        }
        Ok(())
    }

    /// Community of node `i`.
    pub fn community(&self, i: usize) -> usize {
        i * self.num_communities / self.num_nodes
    }

    fn block(&self, c: usize) -> std::ops::Range<usize> {
        let start = (c * self.num_nodes).div_ceil(self.num_communities);
        let end = ((c + 1) * self.num_nodes).div_ceil(self.num_communities);
        start..end
    }
}

/// Samples a [`SyntheticSpec`]. Edge sampling skips ahead geometrically, so
/// time and memory are `O(n + |E|)` rather than `O(n²)`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<DirectedAttributedGraph> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut edges = Vec::new();
    for a in 0..spec.num_communities {
        for b in 0..spec.num_communities {
            let p = if a == b {
                spec.intra_prob
            } else if spec.one_way_inter && a > b {
                0.0
            } else {
                spec.inter_prob
            };
            sample_block(&mut rng, spec.block(a), spec.block(b), p, &mut edges);
        }
    }
    let labels = (0..spec.num_nodes).map(|i| Some(spec.community(i))).collect();
    let x = class_attributes(&mut rng, spec, |i| spec.community(i));
    DirectedAttributedGraph::new(&edges, x, labels)
}

/// Bernoulli(p) over every non-self pair of `rows × cols`, visiting only the
/// successes.
fn sample_block(
    rng: &mut ChaCha8Rng,
    rows: std::ops::Range<usize>,
    cols: std::ops::Range<usize>,
    p: f64,
    out: &mut Vec<(usize, usize)>,
) {
    if p <= 0.0 || rows.is_empty() || cols.is_empty() {
        return;
    }
    let width = cols.len() as u64;
    let total = rows.len() as u64 * width;
    let skip = (p < 1.0).then(|| Geometric::new(p).expect("p in (0, 1)"));
    let mut pos = 0u64;
    loop {
        if let Some(g) = &skip {
            pos = pos.saturating_add(g.sample(rng));
        }
        if pos >= total {
            break;
        }
        let i = rows.start + (pos / width) as usize;
        let j = cols.start + (pos % width) as usize;
        if i != j {
            out.push((i, j));
        }
        pos += 1;
    }
}

fn class_attributes(rng: &mut ChaCha8Rng, spec: &SyntheticSpec, class_of: impl Fn(usize) -> usize) -> DenseMatrix {
    let shift = spec.signal / std::f64::consts::SQRT_2;
    let mut x = DenseMatrix::zeros(spec.num_nodes, spec.num_features);
    for i in 0..spec.num_nodes {
        let hot = class_of(i) % spec.num_features;
        for (f, v) in x.row_mut(i).iter_mut().enumerate() {
            let noise: f64 = StandardNormal.sample(rng);
            *v = noise + if f == hot { shift } else { 0.0 };
        }
    }
    x
}

/// Exactly `num_edges` distinct directed non-self edges chosen uniformly,
/// with attributes and `num_classes` round-robin labels. Meant for
/// scalability checks; memory is `O(n·F + |E|)`.
pub fn random_directed_graph(
    num_nodes: usize,
    num_edges: usize,
    num_features: usize,
    num_classes: usize,
    seed: u64,
) -> Result<DirectedAttributedGraph> {
    if num_nodes < 2 || num_classes == 0 {
        return Err(Error::InvalidConfig("need at least two nodes and one class".into()));
    }
    let capacity = num_nodes as u128 * (num_nodes as u128 - 1);
    if num_edges as u128 > capacity / 2 {
        return Err(Error::InvalidConfig(format!(
            "{num_edges} edges is too dense for rejection sampling on {num_nodes} nodes"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::with_capacity(num_edges);
    let mut edges = Vec::with_capacity(num_edges);
    while edges.len() < num_edges {
        let e = (rng.random_range(0..num_nodes), rng.random_range(0..num_nodes));
        if e.0 != e.1 && seen.insert(e) {
            edges.push(e);
        }
    }
    drop(seen);
    let x = DenseMatrix::from_fn(num_nodes, num_features, |_, _| StandardNormal.sample(&mut rng));
    let labels = (0..num_nodes).map(|i| Some(i % num_classes)).collect();
    DirectedAttributedGraph::new(&edges, x, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cliques_without_cross_edges() {
        let spec = SyntheticSpec {
            num_nodes: 10,
            intra_prob: 1.0,
            inter_prob: 0.0,
            ..Default::default()
        };
        let g = generate_synthetic(&spec).unwrap();
        assert_eq!(g.num_edges(), 2 * 5 * 4);
        for (i, j) in g.edges() {
            assert_eq!(spec.community(i), spec.community(j));
        }
        assert_eq!(g.self_loop_count(), 0);
    }

    #[test]
    fn blocks_cover_nodes_and_match_community() {
        let spec = SyntheticSpec {
            num_nodes: 23,
            num_communities: 4,
            ..Default::default()
        };
        let mut covered = 0;
        for c in 0..4 {
            for i in spec.block(c) {
                assert_eq!(spec.community(i), c);
                covered += 1;
            }
        }
        assert_eq!(covered, 23);
    }

    #[test]
    fn edge_density_near_target() {
        let spec = SyntheticSpec {
            num_nodes: 400,
            ..Default::default()
        };
        let g = generate_synthetic(&spec).unwrap();
        let expected = 2.0 * 200.0 * 199.0 * 0.1 + 2.0 * 200.0 * 200.0 * 0.01;
        let sd = (expected * 0.1f64).sqrt() * 2.0;
        assert!((g.num_edges() as f64 - expected).abs() < 5.0 * sd, "{}", g.num_edges());
    }

    #[test]
    fn one_way_inter_edges() {
        let spec = SyntheticSpec {
            one_way_inter: true,
            inter_prob: 0.05,
            ..Default::default()
        };
        let g = generate_synthetic(&spec).unwrap();
        let cross: Vec<_> = g.edges().filter(|&(i, j)| spec.community(i) != spec.community(j)).collect();
        assert!(!cross.is_empty());
        assert!(cross.iter().all(|&(i, j)| spec.community(i) < spec.community(j)));
    }

    #[test]
    fn zero_signal_carries_no_class_information() {
        let spec = SyntheticSpec {
            num_nodes: 2000,
            signal: 0.0,
            ..Default::default()
        };
        let g = generate_synthetic(&spec).unwrap();
        for f in 0..spec.num_features {
            let mean = |c: usize| {
                let rows: Vec<f64> = (0..2000).filter(|&i| spec.community(i) == c).map(|i| g.attributes().get(i, f)).collect();
                rows.iter().sum::<f64>() / rows.len() as f64
            };
            // sd of a difference of two 1000-sample means is about 0.045
            assert!((mean(0) - mean(1)).abs() < 0.25);
        }
    }

    #[test]
    fn seeds_reproduce_and_differ() {
        let a = generate_synthetic(&SyntheticSpec::default()).unwrap();
        let b = generate_synthetic(&SyntheticSpec::default()).unwrap();
        assert_eq!(a.edges().collect::<Vec<_>>(), b.edges().collect::<Vec<_>>());
        assert_eq!(a.attributes(), b.attributes());
        let c = generate_synthetic(&SyntheticSpec { seed: 1, ..Default::default() }).unwrap();
        assert_ne!(a.edges().collect::<Vec<_>>(), c.edges().collect::<Vec<_>>());
    }

    #[test]
    fn exact_edge_count() {
        let g = random_directed_graph(300, 1000, 4, 3, 2).unwrap();
        assert_eq!(g.num_edges(), 1000);
        assert_eq!(g.self_loop_count(), 0);
        assert!(random_directed_graph(3, 5, 1, 1, 0).is_err());
    }

    #[test]
    fn invalid_specs() {
        assert!(generate_synthetic(&SyntheticSpec { intra_prob: 1.5, ..Default::default() }).is_err());
        assert!(generate_synthetic(&SyntheticSpec { num_nodes: 1, ..Default::default() }).is_err());
    }
}
