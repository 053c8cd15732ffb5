use crate::error::{Error, Result};
use crate::graph::DirectedAttributedGraph;
use crate::linalg::DenseMatrix;

use super::config::ModelConfig;
use super::forward::forward_branch;
use super::config::LossReduction;
use super::loss::{TrainMask, LOG_CLAMP};
use super::params::{init_params, Branch, ModelParams};
use super::train::{branch_loss_and_gradients, BranchOperator, Propagation};

/// Central-difference step.
pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct ParamCheck {
    pub branch: Branch,
    pub layer: usize,
    pub shape: (usize, usize),
    pub max_rel_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub entries: Vec<ParamCheck>,
    pub tolerance: f64,
}

impl GradCheckReport {
    pub fn max_rel_error(&self) -> f64 {
        self.entries.iter().map(|e| e.max_rel_error).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max_rel_error() < self.tolerance
    }
}

/// `|a − b| / max(|a|, |b|, 1e-8)`
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

/// Compares analytic gradients with central finite differences over every
/// entry of every weight matrix of both branches, at freshly initialized
/// parameters and with all labeled nodes in the mask.
pub fn check_gradients(g: &DirectedAttributedGraph, cfg: &ModelConfig, tolerance: f64) -> Result<GradCheckReport> {
    cfg.validate()?;
    let params = init_params(cfg, g.num_features());
    check_gradients_at(g, cfg, &TrainMask::all_labeled(g), &params, tolerance)
}

pub fn check_gradients_at(
    g: &DirectedAttributedGraph,
    cfg: &ModelConfig,
    mask: &TrainMask,
    params: &ModelParams,
    tolerance: f64,
) -> Result<GradCheckReport> {
    let prop = Propagation::new(g, cfg.normalize_adjacency);
    let scale = match cfg.loss_reduction {
        LossReduction::Mean => 1.0 / mask.count().max(1) as f64,
        LossReduction::Sum => 1.0,
    };
    let mut entries = Vec::new();
    for branch in [Branch::Source, Branch::Target] {
        let op = prop.branch(branch);
        let weights = params.weights(branch);
        let (_, grads, _) =
            branch_loss_and_gradients(op, g.attributes(), weights, g.labels(), mask, cfg.loss_reduction)?;
        let mut perturbed = weights.to_vec();
        for (layer, grad) in grads.iter().enumerate() {
            let mut worst = 0.0f64;
            for idx in 0..grad.as_slice().len() {
                let original = perturbed[layer].as_slice()[idx];
                perturbed[layer].as_mut_slice()[idx] = original + FD_STEP;
                let plus = node_losses(op, g, &perturbed, mask)?;
                perturbed[layer].as_mut_slice()[idx] = original - FD_STEP;
                let minus = node_losses(op, g, &perturbed, mask)?;
                perturbed[layer].as_mut_slice()[idx] = original;
                let diff: f64 = plus.iter().zip(&minus).map(|(p, m)| p.minus(m)).sum();
                let numeric = diff * scale / (2.0 * FD_STEP);
                worst = worst.max(relative_error(grad.as_slice()[idx], numeric));
            }
            entries.push(ParamCheck {
                branch,
                layer,
                shape: grad.shape(),
                max_rel_error: worst,
            });
        }
    }
    Ok(GradCheckReport { entries, tolerance })
}

/// One node's cross-entropy term `(z_top − z_c) + ln(1 + Σ_{k≠top} e^{z_k − z_top})`,
/// kept in parts so two evaluations can be differenced without the large
/// logit gap swamping a tiny change in the log-sum-exp part.
struct NodeLoss {
    top: usize,
    gap: f64,
    logits: Vec<f64>,
    label: usize,
    soft: f64,
    clamped: bool,
}

impl NodeLoss {
    fn value(&self) -> f64 {
        if self.clamped {
            -LOG_CLAMP.ln()
        } else {
            self.gap + self.soft
        }
    }

    /// `self − other` for the same node at two nearby weight settings.
    fn minus(&self, other: &NodeLoss) -> f64 {
        if self.clamped && other.clamped {
            return 0.0;
        }
        if self.clamped || other.clamped || self.top != other.top {
            return self.value() - other.value();
        }
        let d = |k: usize| self.logits[k] - other.logits[k];
        (d(self.top) - d(self.label)) + (self.soft - other.soft)
    }
}

/// Unscaled per-node loss terms from the logits, via a log-softmax that
/// keeps small losses of near-certain predictions exact.
fn node_losses(op: &BranchOperator, g: &DirectedAttributedGraph, weights: &[DenseMatrix], mask: &TrainMask) -> Result<Vec<NodeLoss>> {
    let acts = forward_branch(&op.forward, g.attributes(), weights)?;
    let logits = acts.pre.last().expect("non-empty weight stack");
    let floor = LOG_CLAMP.ln();
    mask.indices()
        .map(|i| {
            let label = g.labels()[i].ok_or_else(|| Error::InvalidConfig(format!("masked node {i} is unlabeled")))?;
            let row = logits.row(i);
            let top = (0..row.len()).fold(0, |b, k| if row[k] > row[b] { k } else { b });
            let rest: f64 = (0..row.len()).filter(|&k| k != top).map(|k| (row[k] - row[top]).exp()).sum();
            let gap = row[top] - row[label];
            let soft = rest.ln_1p();
            Ok(NodeLoss {
                top,
                gap,
                logits: row.to_vec(),
                label,
                soft,
                clamped: -(gap + soft) < floor,
            })
        })
        .collect()
}
