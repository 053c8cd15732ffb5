use crate::error::{Error, Result};
use crate::graph::AugmentedAdjacency;
use crate::linalg::{matmul, relu, softmax_rows, spmm, DenseMatrix};

/// Everything the backward pass needs from one branch's forward pass.
///
/// For a stack of `l + 1` weights, `pre[k] = Â · (H⁽ᵏ⁾ · W⁽ᵏ⁾)` for
/// `k = 0..=l`, `hidden[k] = ReLU(pre[k])` holds `H⁽ᵏ⁺¹⁾` for the `l`
/// convolutional layers, and `probs = softmax(pre[l])`. The input `H⁽⁰⁾ = X`
/// is not copied.
#[derive(Debug, Clone)]
pub struct BranchActivations {
    pub pre: Vec<DenseMatrix>,
    pub hidden: Vec<DenseMatrix>,
    pub probs: DenseMatrix,
}

impl BranchActivations {
    /// Output of the last convolutional layer: the branch's embedding.
    pub fn embedding(&self) -> &DenseMatrix {
        self.hidden.last().expect("at least one convolutional layer")
    }
}

fn check_chain(n: usize, x: &DenseMatrix, weights: &[DenseMatrix]) -> Result<()> {
    if x.rows() != n {
        return Err(Error::dims("forward: attribute rows vs adjacency", n, x.rows()));
    }
    if weights.len() < 2 {
        return Err(Error::dims("forward: weight stack length", "at least 2", weights.len()));
    }
    let mut width = x.cols();
    for w in weights {
        if w.rows() != width {
            return Err(Error::dims("forward: weight chain", width, w.rows()));
        }
        width = w.cols();
    }
    Ok(())
}

/// Runs one convolution branch. Passing `Â` gives the source branch and
/// `Âᵀ` the target branch.
///
/// Each layer multiplies by the weight first and propagates second, so the
/// temporaries are `n × width` and the sparse product costs `nnz · width`.
pub fn forward_branch(
    adj: &AugmentedAdjacency,
    x: &DenseMatrix,
    weights: &[DenseMatrix],
) -> Result<BranchActivations> {
    check_chain(adj.dim(), x, weights)?;
    let last = weights.len() - 1;
    let mut pre = Vec::with_capacity(weights.len());
    let mut hidden: Vec<DenseMatrix> = Vec::with_capacity(last);
    for (k, w) in weights.iter().enumerate() {
        let input = if k == 0 { x } else { &hidden[k - 1] };
        let projected = matmul(input, w)?;
        let p = spmm(&adj.matrix, &projected)?;
        if k < last {
            hidden.push(relu(&p));
        }
        pre.push(p);
    }
    let probs = softmax_rows(&pre[last]);
    Ok(BranchActivations { pre, hidden, probs })
}

/// Like [`forward_branch`] but stops after the last convolutional layer and
/// returns only its output.
pub fn embed_branch(
    adj: &AugmentedAdjacency,
    x: &DenseMatrix,
    weights: &[DenseMatrix],
) -> Result<DenseMatrix> {
    check_chain(adj.dim(), x, weights)?;
    let conv = &weights[..weights.len() - 1];
    let mut h = relu(&spmm(&adj.matrix, &matmul(x, &conv[0])?)?);
    for w in &conv[1..] {
        h = relu(&spmm(&adj.matrix, &matmul(&h, w)?)?);
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{augment_with_self_loops, DirectedAttributedGraph};
    use crate::model::{init_params, ModelConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_graph(n: usize, f: usize, m: usize, seed: u64) -> DirectedAttributedGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let edges: Vec<_> = (0..m).map(|_| (rng.random_range(0..n), rng.random_range(0..n))).collect();
        let x = DenseMatrix::from_fn(n, f, |_, _| rng.random_range(-1.0..1.0));
        DirectedAttributedGraph::new(&edges, x, vec![Some(0); n]).unwrap()
    }

    /// Dense `A + I` with explicit loops, no shared kernels.
    fn naive_forward(a_hat: &[Vec<f64>], x: &DenseMatrix, weights: &[DenseMatrix]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let n = a_hat.len();
        let mut h: Vec<Vec<f64>> = (0..n).map(|i| x.row(i).to_vec()).collect();
        let mut embedding = Vec::new();
        for (k, w) in weights.iter().enumerate() {
            let mut agg = vec![vec![0.0; h[0].len()]; n];
            for i in 0..n {
                for j in 0..n {
                    for c in 0..h[0].len() {
                        agg[i][c] += a_hat[i][j] * h[j][c];
                    }
                }
            }
            let mut out = vec![vec![0.0; w.cols()]; n];
            for i in 0..n {
                for c in 0..w.cols() {
                    for r in 0..w.rows() {
                        out[i][c] += agg[i][r] * w.get(r, c);
                    }
                }
            }
            if k + 1 < weights.len() {
                for row in &mut out {
                    for v in row.iter_mut() {
                        *v = v.max(0.0);
                    }
                }
                embedding = out.clone();
            } else {
                for row in &mut out {
                    let m = row.iter().cloned().fold(f64::MIN, f64::max);
                    let s: f64 = row.iter().map(|v| (v - m).exp()).sum();
                    for v in row.iter_mut() {
                        *v = (*v - m).exp() / s;
                    }
                }
            }
            h = out;
        }
        (embedding, h)
    }

    fn dense_a_hat(g: &DirectedAttributedGraph, transposed: bool) -> Vec<Vec<f64>> {
        let n = g.num_nodes();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = 1.0;
        }
        for (s, d) in g.edges() {
            if transposed {
                a[d][s] = 1.0;
            } else {
                a[s][d] = 1.0;
            }
        }
        a
    }

    #[test]
    fn edgeless_graph_collapses_to_dense_layer() {
        let g = random_graph(6, 3, 0, 1);
        let cfg = ModelConfig { hidden_dim: 4, num_classes: 2, ..Default::default() };
        let p = init_params(&cfg, 3);
        let acts = forward_branch(&augment_with_self_loops(&g), g.attributes(), &p.source).unwrap();
        let expected = relu(&matmul(g.attributes(), &p.source[0]).unwrap());
        assert_eq!(acts.embedding(), &expected);
    }

    #[test]
    fn zero_weights_give_uniform_output() {
        let g = DirectedAttributedGraph::new(
            &[(0, 0)],
            DenseMatrix::from_rows(&[[1.0, 0.0]]).unwrap(),
            vec![Some(0)],
        )
        .unwrap();
        let w = vec![DenseMatrix::zeros(2, 3), DenseMatrix::zeros(3, 4)];
        let acts = forward_branch(&augment_with_self_loops(&g), g.attributes(), &w).unwrap();
        for &v in acts.probs.row(0) {
            assert!((v - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn matches_dense_naive_forward() {
        let g = random_graph(10, 5, 25, 2);
        for layers in 1..=3 {
            let cfg = ModelConfig { num_layers: layers, hidden_dim: 4, num_classes: 3, seed: 9, ..Default::default() };
            let p = init_params(&cfg, 5);
            let a_hat = augment_with_self_loops(&g);
            for (adj, stack, transposed) in [(a_hat.clone(), &p.source, false), (a_hat.transpose(), &p.target, true)] {
                let acts = forward_branch(&adj, g.attributes(), stack).unwrap();
                let (emb, probs) = naive_forward(&dense_a_hat(&g, transposed), g.attributes(), stack);
                for i in 0..10 {
                    for c in 0..4 {
                        assert!((acts.embedding().get(i, c) - emb[i][c]).abs() < 1e-12);
                    }
                    for c in 0..3 {
                        assert!((acts.probs.get(i, c) - probs[i][c]).abs() < 1e-12);
                    }
                    let total: f64 = acts.probs.row(i).iter().sum();
                    assert!((total - 1.0).abs() < 1e-9);
                }
                assert_eq!(&embed_branch(&adj, g.attributes(), stack).unwrap(), acts.embedding());
            }
        }
    }

    #[test]
    fn target_branch_mirrors_source_on_reversed_graph() {
        let g = random_graph(15, 4, 40, 3);
        let cfg = ModelConfig { num_layers: 2, hidden_dim: 6, num_classes: 3, ..Default::default() };
        let p = init_params(&cfg, 4);
        let t = forward_branch(&augment_with_self_loops(&g).transpose(), g.attributes(), &p.source).unwrap();
        let r = forward_branch(&augment_with_self_loops(&g.reversed()), g.attributes(), &p.source).unwrap();
        assert_eq!(t.probs, r.probs);
        assert_eq!(t.embedding(), r.embedding());
    }

    #[test]
    fn rejects_broken_chains() {
        let g = random_graph(4, 3, 3, 4);
        let adj = augment_with_self_loops(&g);
        let w = vec![DenseMatrix::zeros(2, 3), DenseMatrix::zeros(3, 2)];
        assert!(forward_branch(&adj, g.attributes(), &w).is_err());
        let short = vec![DenseMatrix::zeros(3, 2)];
        assert!(forward_branch(&adj, g.attributes(), &short).is_err());
    }
}
