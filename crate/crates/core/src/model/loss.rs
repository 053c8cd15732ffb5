use crate::error::{Error, Result};
use crate::graph::{DirectedAttributedGraph, Label};
use crate::linalg::DenseMatrix;

use super::config::LossReduction;

/// Probabilities are clamped here before taking the log.
pub const LOG_CLAMP: f64 = 1e-12;

/// Which nodes contribute to the classification loss.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainMask {
    selected: Vec<bool>,
}

impl TrainMask {
    pub fn from_bools(selected: Vec<bool>) -> Self {
        TrainMask { selected }
    }

    pub fn from_indices(n: usize, indices: &[usize]) -> Self {
        let mut selected = vec![false; n];
        for &i in indices {
            selected[i] = true;
        }
        TrainMask { selected }
    }

    /// Every labeled node.
    pub fn all_labeled(g: &DirectedAttributedGraph) -> Self {
        TrainMask {
            selected: g.labels().iter().map(Option::is_some).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn count(&self) -> usize {
        self.selected.iter().filter(|&&b| b).count()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.selected.get(i).copied().unwrap_or(false)
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.selected.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    /// Checks the mask against a label vector: same length, at least one
    /// node, every selected node labeled with a class below `num_classes`.
    /// A class with no masked node only produces a warning.
    pub fn validate(&self, labels: &[Label], num_classes: usize) -> Result<()> {
        if self.selected.len() != labels.len() {
            return Err(Error::dims("mask length", labels.len(), self.selected.len()));
        }
        let mut seen = vec![false; num_classes];
        let mut any = false;
        for i in self.indices() {
            any = true;
            match labels[i] {
                Some(c) if c < num_classes => seen[c] = true,
                Some(c) => {
                    return Err(Error::InvalidConfig(format!(
                        "node {i} has label {c} but the model has {num_classes} classes"
                    )))
                }
                None => {
                    return Err(Error::InvalidConfig(format!("masked node {i} is unlabeled")))
                }
            }
        }
        if !any {
            return Err(Error::EmptyMask);
        }
        if let Some(c) = seen.iter().position(|&s| !s) {
            log::warn!("class {c} has no node in the training mask");
        }
        Ok(())
    }
}

/// Masked cross-entropy averaged over the masked nodes.
pub fn masked_cross_entropy(y: &DenseMatrix, labels: &[Label], mask: &TrainMask) -> Result<f64> {
    masked_cross_entropy_with(y, labels, mask, LossReduction::Mean)
}

pub fn masked_cross_entropy_with(
    y: &DenseMatrix,
    labels: &[Label],
    mask: &TrainMask,
    reduction: LossReduction,
) -> Result<f64> {
    if y.rows() != labels.len() || mask.len() != labels.len() {
        return Err(Error::dims("cross-entropy rows", labels.len(), y.rows()));
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for i in mask.indices() {
        let c = labels[i].ok_or_else(|| Error::InvalidConfig(format!("masked node {i} is unlabeled")))?;
        if c >= y.cols() {
            return Err(Error::dims("label vs class count", y.cols(), c));
        }
        total -= y.get(i, c).max(LOG_CLAMP).ln();
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(match reduction {
        LossReduction::Mean => total / count as f64,
        LossReduction::Sum => total,
    })
}
