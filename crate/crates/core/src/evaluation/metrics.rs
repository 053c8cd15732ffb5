use std::collections::HashSet;

use crate::embedding::RankedPairList;
use crate::error::{Error, Result};
use crate::graph::DirectedAttributedGraph;
use crate::linalg::DenseMatrix;

/// Membership test for the relevant set of a ranking.
pub trait EdgeSet {
    fn contains_edge(&self, src: usize, dst: usize) -> bool;
}

impl EdgeSet for HashSet<(usize, usize)> {
    fn contains_edge(&self, src: usize, dst: usize) -> bool {
        self.contains(&(src, dst))
    }
}

impl EdgeSet for DirectedAttributedGraph {
    fn contains_edge(&self, src: usize, dst: usize) -> bool {
        self.has_edge(src, dst)
    }
}

/// Fraction of the first `k` ranked pairs that are relevant.
pub fn precision_at_k(ranked: &RankedPairList, relevant: &impl EdgeSet, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    if k > ranked.len() {
        return Err(Error::KTooLarge { k, len: ranked.len() });
    }
    let hits = ranked.pairs()[..k]
        .iter()
        .filter(|p| relevant.contains_edge(p.src, p.dst))
        .count();
    Ok(hits as f64 / k as f64)
}

fn check_pair(y_true: &[usize], y_pred: &[usize]) -> Result<()> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

/// Per-class (tp, fp, fn).
fn confusion(y_true: &[usize], y_pred: &[usize], num_classes: usize) -> Result<Vec<(u64, u64, u64)>> {
    check_pair(y_true, y_pred)?;
    let mut counts = vec![(0u64, 0u64, 0u64); num_classes];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t >= num_classes || p >= num_classes {
            return Err(Error::dims("class label", num_classes, t.max(p)));
        }
        if t == p {
            counts[t].0 += 1;
        } else {
            counts[p].1 += 1;
            counts[t].2 += 1;
        }
    }
    Ok(counts)
}

/// Unweighted mean of per-class F1 over exactly `num_classes` classes. A
/// class with no true and no predicted members scores 0.
pub fn macro_f1(y_true: &[usize], y_pred: &[usize], num_classes: usize) -> Result<f64> {
    if num_classes == 0 {
        return Err(Error::InvalidConfig("num_classes must be positive".into()));
    }
    let counts = confusion(y_true, y_pred, num_classes)?;
    let total: f64 = counts
        .iter()
        .map(|&(tp, fp, fn_)| {
            let denom = 2 * tp + fp + fn_;
            if denom == 0 {
                0.0
            } else {
                (2 * tp) as f64 / denom as f64
            }
        })
        .sum();
    Ok(total / num_classes as f64)
}

/// F1 of the pooled counts, `2ΣTP / (2ΣTP + ΣFP + ΣFN)`.
pub fn micro_f1(y_true: &[usize], y_pred: &[usize], num_classes: usize) -> Result<f64> {
    let counts = confusion(y_true, y_pred, num_classes)?;
    let (tp, fp, fn_) = counts
        .iter()
        .fold((0u64, 0u64, 0u64), |acc, c| (acc.0 + c.0, acc.1 + c.1, acc.2 + c.2));
    Ok((2 * tp) as f64 / (2 * tp + fp + fn_) as f64)
}

pub fn accuracy(y_true: &[usize], y_pred: &[usize]) -> Result<f64> {
    check_pair(y_true, y_pred)?;
    let correct = y_true.iter().zip(y_pred).filter(|(t, p)| t == p).count();
    Ok(correct as f64 / y_true.len() as f64)
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Mean silhouette with Euclidean distance. Points in singleton clusters
/// score 0. Cost is `O(n² · dim)` time and `O(n · clusters)` memory.
pub fn silhouette(points: &DenseMatrix, labels: &[usize]) -> Result<f64> {
    let n = points.rows();
    if labels.len() != n {
        return Err(Error::LengthMismatch { left: n, right: labels.len() });
    }
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let num_labels = labels.iter().max().map_or(0, |&m| m + 1);
    let mut sizes = vec![0usize; num_labels];
    labels.iter().for_each(|&l| sizes[l] += 1);
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return Err(Error::SingleCluster);
    }
    let mut sums = vec![0.0; num_labels];
    let mut total = 0.0;
    for i in 0..n {
        let own = labels[i];
        if sizes[own] == 1 {
            continue;
        }
        sums.iter_mut().for_each(|s| *s = 0.0);
        for j in 0..n {
            if j != i {
                sums[labels[j]] += euclidean(points.row(i), points.row(j));
            }
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..num_labels)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    Ok(total / n as f64)
}
