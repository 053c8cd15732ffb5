//! Multinomial logistic regression, the downstream classifier for node
//! embeddings.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{matmul, matmul_tn, softmax_rows, DenseMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRegConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// L2 strength on the feature weights; the bias row is not penalized.
    pub l2: f64,
    pub seed: u64,
    /// Standardize each feature with the training mean and deviation.
    pub standardize: bool,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        LogRegConfig {
            learning_rate: 0.1,
            epochs: 500,
            l2: 1e-4,
            seed: 0,
            standardize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRegModel {
    /// `(F + 1) × C`; the last row is the bias.
    pub weights: DenseMatrix,
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub config: LogRegConfig,
}

impl LogRegModel {
    pub fn num_features(&self) -> usize {
        self.weights.rows() - 1
    }

    pub fn num_classes(&self) -> usize {
        self.weights.cols()
    }

    fn design(&self, z: &DenseMatrix) -> Result<DenseMatrix> {
        if z.cols() != self.num_features() {
            return Err(Error::dims("classifier feature width", self.num_features(), z.cols()));
        }
        Ok(with_bias(z, &self.mean, &self.scale))
    }
}

/// Appends a constant-1 column after applying `(x − mean) / scale`.
fn with_bias(z: &DenseMatrix, mean: &[f64], scale: &[f64]) -> DenseMatrix {
    let f = z.cols();
    DenseMatrix::from_fn(z.rows(), f + 1, |i, j| {
        if j == f {
            1.0
        } else {
            (z.get(i, j) - mean[j]) / scale[j]
        }
    })
}

/// Per-column mean and population deviation; zero-variance columns get
/// scale 1 so they stay zero after centering.
fn column_stats(z: &DenseMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = z.rows() as f64;
    let mut mean = vec![0.0; z.cols()];
    for i in 0..z.rows() {
        for (m, v) in mean.iter_mut().zip(z.row(i)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; z.cols()];
    for i in 0..z.rows() {
        for ((s, v), m) in var.iter_mut().zip(z.row(i)).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let scale = var
        .into_iter()
        .map(|s| {
            let sd = (s / n).sqrt();
            if sd > 1e-12 {
                sd
            } else {
                1.0
            }
        })
        .collect();
    (mean, scale)
}

/// Mean cross-entropy plus `(λ/2)·‖W_features‖²` and its gradient, for a
/// design matrix whose last column is the bias.
pub fn logreg_objective(design: &DenseMatrix, labels: &[usize], weights: &DenseMatrix, l2: f64) -> Result<(f64, DenseMatrix)> {
    if design.rows() != labels.len() {
        return Err(Error::LengthMismatch {
            left: design.rows(),
            right: labels.len(),
        });
    }
    if labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut probs = softmax_rows(&matmul(design, weights)?);
    let n = labels.len() as f64;
    let mut loss = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        if y >= weights.cols() {
            return Err(Error::dims("classifier label", weights.cols(), y));
        }
        loss -= probs.get(i, y).max(1e-300).ln();
        let row = probs.row_mut(i);
        row[y] -= 1.0;
        row.iter_mut().for_each(|v| *v /= n);
    }
    loss /= n;
    let mut grad = matmul_tn(design, &probs)?;
    let bias = weights.rows() - 1;
    for r in 0..bias {
        for c in 0..weights.cols() {
            let w = weights.get(r, c);
            loss += 0.5 * l2 * w * w;
            grad.set(r, c, grad.get(r, c) + l2 * w);
        }
    }
    Ok((loss, grad))
}

/// Full-batch gradient descent on the regularized mean cross-entropy.
/// `num_classes` fixes the output width even when some classes are absent
/// from the training rows.
pub fn train_logreg(z: &DenseMatrix, labels: &[usize], num_classes: usize, cfg: &LogRegConfig) -> Result<LogRegModel> {
    if z.rows() != labels.len() {
        return Err(Error::LengthMismatch {
            left: z.rows(),
            right: labels.len(),
        });
    }
    if let Some(&bad) = labels.iter().find(|&&y| y >= num_classes) {
        return Err(Error::dims("classifier label", num_classes, bad));
    }
    let mut present = vec![false; num_classes];
    labels.iter().for_each(|&y| present[y] = true);
    if present.iter().filter(|&&p| p).count() < 2 {
        return Err(Error::SingleClassInput);
    }
    if !(cfg.learning_rate > 0.0) || cfg.epochs == 0 || !(cfg.l2 >= 0.0) {
        return Err(Error::InvalidConfig(format!("bad logistic regression config {cfg:?}")));
    }

    let (mean, scale) = if cfg.standardize {
        column_stats(z)
    } else {
        (vec![0.0; z.cols()], vec![1.0; z.cols()])
    };
    let design = with_bias(z, &mean, &scale);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut weights = DenseMatrix::from_fn(z.cols() + 1, num_classes, |_, _| rng.random_range(-0.01..0.01));
    for _ in 0..cfg.epochs {
        let (_, grad) = logreg_objective(&design, labels, &weights, cfg.l2)?;
        weights.axpy(-cfg.learning_rate, &grad);
    }
    if !weights.is_finite() {
        return Err(Error::InvalidConfig("logistic regression diverged".into()));
    }
    Ok(LogRegModel {
        weights,
        mean,
        scale,
        config: *cfg,
    })
}

pub fn predict_proba(m: &LogRegModel, z: &DenseMatrix) -> Result<DenseMatrix> {
    Ok(softmax_rows(&matmul(&m.design(z)?, &m.weights)?))
}

/// Argmax class per row; ties go to the smallest class index.
pub fn predict_logreg(m: &LogRegModel, z: &DenseMatrix) -> Result<Vec<usize>> {
    let logits = matmul(&m.design(z)?, &m.weights)?;
    Ok((0..logits.rows()).map(|i| argmax(logits.row(i))).collect())
}

pub(crate) fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (c, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = c;
        }
    }
    best
}
