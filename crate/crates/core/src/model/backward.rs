use crate::error::{Error, Result};
use crate::graph::{AugmentedAdjacency, Label};
use crate::linalg::{matmul_nt, matmul_tn, spmm, DenseMatrix};

use super::config::LossReduction;
use super::forward::BranchActivations;
use super::loss::{TrainMask, LOG_CLAMP};

/// Exact gradients of the masked cross-entropy with respect to every weight
/// matrix of one branch.
///
/// `adj` must be the propagation matrix the activations were computed with;
/// its transpose is the adjoint of the sparse product.
pub fn backward(
    adj: &AugmentedAdjacency,
    x: &DenseMatrix,
    weights: &[DenseMatrix],
    acts: &BranchActivations,
    labels: &[Label],
    mask: &TrainMask,
    reduction: LossReduction,
) -> Result<Vec<DenseMatrix>> {
    backward_with_adjoint(&adj.transpose(), x, weights, acts, labels, mask, reduction)
}

/// [`backward`] with a precomputed adjoint, so training does not transpose
/// the adjacency every epoch.
pub fn backward_with_adjoint(
    adjoint: &AugmentedAdjacency,
    x: &DenseMatrix,
    weights: &[DenseMatrix],
    acts: &BranchActivations,
    labels: &[Label],
    mask: &TrainMask,
    reduction: LossReduction,
) -> Result<Vec<DenseMatrix>> {
    let last = weights.len() - 1;
    if acts.pre.len() != weights.len() || acts.hidden.len() != last {
        return Err(Error::dims("backward: activation count", weights.len(), acts.pre.len()));
    }
    let n = acts.probs.rows();
    if labels.len() != n || mask.len() != n || x.rows() != n || adjoint.dim() != n {
        return Err(Error::dims("backward: node count", n, labels.len()));
    }
    let count = mask.count();
    if count == 0 {
        return Err(Error::EmptyMask);
    }
    let scale = match reduction {
        LossReduction::Mean => 1.0 / count as f64,
        LossReduction::Sum => 1.0,
    };

    // dL/dlogits = (Y − onehot) · scale on masked rows, zero elsewhere.
    // Rows whose true-class probability sits below the log clamp have a
    // constant loss term and so contribute nothing.
    let classes = acts.probs.cols();
    let mut grad_pre = DenseMatrix::zeros(n, classes);
    for i in mask.indices() {
        let c = labels[i].ok_or_else(|| Error::InvalidConfig(format!("masked node {i} is unlabeled")))?;
        if c >= classes {
            return Err(Error::dims("backward: label vs class count", classes, c));
        }
        if acts.probs.get(i, c) < LOG_CLAMP {
            continue;
        }
        let row = grad_pre.row_mut(i);
        for (g, &p) in row.iter_mut().zip(acts.probs.row(i)) {
            *g = p * scale;
        }
        // p_c − 1 written as −Σ_{k≠c} p_k, which keeps its precision when
        // p_c is close to 1
        let others: f64 = acts.probs.row(i).iter().enumerate().filter(|&(k, _)| k != c).map(|(_, p)| p).sum();
        row[c] = -others * scale;
    }

    let mut grads = vec![DenseMatrix::zeros(0, 0); weights.len()];
    for k in (0..=last).rev() {
        let grad_projected = spmm(&adjoint.matrix, &grad_pre)?;
        let input = if k == 0 { x } else { &acts.hidden[k - 1] };
        grads[k] = matmul_tn(input, &grad_projected)?;
        if k > 0 {
            let mut grad_hidden = matmul_nt(&grad_projected, &weights[k])?;
            for (g, &p) in grad_hidden
                .as_mut_slice()
                .iter_mut()
                .zip(acts.pre[k - 1].as_slice())
            {
                if p <= 0.0 {
                    *g = 0.0;
                }
            }
            grad_pre = grad_hidden;
        }
    }
    Ok(grads)
}
