use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::DenseMatrix;

use super::config::ModelConfig;

/// Which convolution branch a weight stack belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// Aggregates over out-neighbours (propagates with `Â`).
    Source,
    /// Aggregates over in-neighbours (propagates with `Âᵀ`).
    Target,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::Source => "source",
            Branch::Target => "target",
        }
    }
}

/// First and second moment estimates for one weight stack.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub first: Vec<DenseMatrix>,
    pub second: Vec<DenseMatrix>,
}

impl Moments {
    pub fn zeros_like(stack: &[DenseMatrix]) -> Self {
        let z: Vec<_> = stack.iter().map(|w| DenseMatrix::zeros(w.rows(), w.cols())).collect();
        Moments {
            first: z.clone(),
            second: z,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub step: u64,
    pub source: Moments,
    pub target: Moments,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub source: Vec<DenseMatrix>,
    pub target: Vec<DenseMatrix>,
    pub adam: AdamState,
    /// Full-batch epochs applied so far.
    pub epochs_trained: u64,
}

impl ModelParams {
    pub fn weights(&self, branch: Branch) -> &[DenseMatrix] {
        match branch {
            Branch::Source => &self.source,
            Branch::Target => &self.target,
        }
    }

    pub fn weights_mut(&mut self, branch: Branch) -> &mut Vec<DenseMatrix> {
        match branch {
            Branch::Source => &mut self.source,
            Branch::Target => &mut self.target,
        }
    }

    pub fn num_features(&self) -> usize {
        self.source[0].rows()
    }

    pub fn hidden_dim(&self) -> usize {
        self.source[0].cols()
    }

    pub fn is_finite(&self) -> bool {
        self.source.iter().chain(&self.target).all(DenseMatrix::is_finite)
    }
}

/// Glorot-uniform weights from a seeded ChaCha stream; the source stack is
/// drawn first, then the target stack, so the two are independent.
pub fn init_params(cfg: &ModelConfig, num_features: usize) -> ModelParams {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let shapes = cfg.layer_shapes(num_features);
    let draw_stack = |rng: &mut ChaCha8Rng| -> Vec<DenseMatrix> {
        shapes
            .iter()
            .map(|&(fan_in, fan_out)| {
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                DenseMatrix::from_fn(fan_in, fan_out, |_, _| rng.random_range(-limit..=limit))
            })
            .collect()
    };
    let source = draw_stack(&mut rng);
    let target = draw_stack(&mut rng);
    let adam = AdamState {
        step: 0,
        source: Moments::zeros_like(&source),
        target: Moments::zeros_like(&target),
    };
    ModelParams {
        source,
        target,
        adam,
        epochs_trained: 0,
    }
}
