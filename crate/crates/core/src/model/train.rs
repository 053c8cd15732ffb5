use crate::error::{Error, Result};
use crate::graph::{augment_with_self_loops, AugmentedAdjacency, DirectedAttributedGraph, Label};
use crate::linalg::DenseMatrix;

use super::adam::adam_step;
use super::backward::backward_with_adjoint;
use super::config::{LossReduction, ModelConfig};
use super::forward::{forward_branch, BranchActivations};
use super::loss::{masked_cross_entropy_with, TrainMask};
use super::params::{init_params, Branch, ModelParams};

/// Propagation matrix of one branch together with its adjoint.
#[derive(Debug, Clone)]
pub struct BranchOperator {
    pub forward: AugmentedAdjacency,
    pub adjoint: AugmentedAdjacency,
}

/// Both branches' operators for a graph: `Â` for the source branch and
/// `Âᵀ` for the target branch. With `normalize` each operator is made
/// row-stochastic, i.e. a mean over the branch's neighbourhood.
#[derive(Debug, Clone)]
pub struct Propagation {
    pub source: BranchOperator,
    pub target: BranchOperator,
}

impl Propagation {
    pub fn new(g: &DirectedAttributedGraph, normalize: bool) -> Self {
        let a_hat = augment_with_self_loops(g);
        let a_hat_t = a_hat.transpose();
        let (src, tgt) = if normalize {
            (a_hat.row_normalized(), a_hat_t.row_normalized())
        } else {
            (a_hat, a_hat_t)
        };
        Propagation {
            source: BranchOperator {
                adjoint: src.transpose(),
                forward: src,
            },
            target: BranchOperator {
                adjoint: tgt.transpose(),
                forward: tgt,
            },
        }
    }

    pub fn branch(&self, branch: Branch) -> &BranchOperator {
        match branch {
            Branch::Source => &self.source,
            Branch::Target => &self.target,
        }
    }
}

/// Losses of both branches at one epoch, measured before the update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLoss {
    pub source: f64,
    pub target: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ModelParams,
    pub history: Vec<EpochLoss>,
}

/// One branch's loss, weight gradients and activations.
pub fn branch_loss_and_gradients(
    op: &BranchOperator,
    x: &DenseMatrix,
    weights: &[DenseMatrix],
    labels: &[Label],
    mask: &TrainMask,
    reduction: LossReduction,
) -> Result<(f64, Vec<DenseMatrix>, BranchActivations)> {
    let acts = forward_branch(&op.forward, x, weights)?;
    let loss = masked_cross_entropy_with(&acts.probs, labels, mask, reduction)?;
    let grads = backward_with_adjoint(&op.adjoint, x, weights, &acts, labels, mask, reduction)?;
    Ok((loss, grads, acts))
}

/// Trains both branches from a fresh seeded initialization.
pub fn train(g: &DirectedAttributedGraph, cfg: &ModelConfig, mask: &TrainMask) -> Result<TrainOutcome> {
    cfg.validate()?;
    let params = init_params(cfg, g.num_features());
    continue_training(g, cfg, mask, params)
}

/// Runs `cfg.epochs` more full-batch epochs starting from `params`.
///
/// Each epoch evaluates the source branch on `Â` and the target branch on
/// `Âᵀ`, backpropagates each branch against its own loss only, and applies
/// one Adam step. The two branches run concurrently.
pub fn continue_training(
    g: &DirectedAttributedGraph,
    cfg: &ModelConfig,
    mask: &TrainMask,
    mut params: ModelParams,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if cfg.num_classes < 2 {
        return Err(Error::InvalidConfig(format!(
            "training needs at least two classes, got {}",
            cfg.num_classes
        )));
    }
    if params.num_features() != g.num_features() {
        return Err(Error::dims("attribute width", params.num_features(), g.num_features()));
    }
    mask.validate(g.labels(), cfg.num_classes)?;

    let prop = Propagation::new(g, cfg.normalize_adjacency);
    let x = g.attributes();
    let labels = g.labels();
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let (src, tgt) = rayon::join(
            || branch_loss_and_gradients(&prop.source, x, &params.source, labels, mask, cfg.loss_reduction),
            || branch_loss_and_gradients(&prop.target, x, &params.target, labels, mask, cfg.loss_reduction),
        );
        let (loss_s, grads_s, _) = src?;
        let (loss_t, grads_t, _) = tgt?;
        if !loss_s.is_finite() || !loss_t.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        history.push(EpochLoss {
            source: loss_s,
            target: loss_t,
        });
        adam_step(&mut params, &grads_s, &grads_t, cfg.learning_rate, &cfg.adam)?;
        params.epochs_trained += 1;
        log::trace!("epoch {epoch}: L_S = {loss_s:.6}, L_T = {loss_t:.6}");
    }
    Ok(TrainOutcome { params, history })
}
