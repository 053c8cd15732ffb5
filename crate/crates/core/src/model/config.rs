use crate::error::{Error, Result};
use crate::graph::DirectedAttributedGraph;

/// How the per-node cross-entropy terms are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossReduction {
    /// Average over the masked nodes.
    #[default]
    Mean,
    /// Plain sum over the masked nodes.
    Sum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamHyper {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        AdamHyper {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Hyperparameters of the two-branch network.
///
/// `num_layers` counts convolutional (hidden) layers; every branch carries
/// `num_layers + 1` weight matrices because the softmax classifier layer is
/// also a convolution. All hidden layers are `hidden_dim` wide, so each node
/// ends up with `2 * hidden_dim` embedding coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub num_layers: usize,
    pub hidden_dim: usize,
    pub num_classes: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub normalize_adjacency: bool,
    pub loss_reduction: LossReduction,
    pub adam: AdamHyper,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            num_layers: 1,
            hidden_dim: 100,
            num_classes: 2,
            learning_rate: 0.01,
            epochs: 200,
            seed: 0,
            normalize_adjacency: false,
            loss_reduction: LossReduction::Mean,
            adam: AdamHyper::default(),
        }
    }
}

impl ModelConfig {
    /// Defaults with `num_classes` taken from the graph's labels.
    pub fn for_graph(g: &DirectedAttributedGraph) -> Self {
        ModelConfig {
            num_classes: g.num_classes(),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_layers == 0 {
            return Err(Error::InvalidConfig("num_layers must be at least 1".into()));
        }
        if self.hidden_dim == 0 {
            return Err(Error::InvalidConfig("hidden_dim must be at least 1".into()));
        }
        if self.num_classes == 0 {
            return Err(Error::InvalidConfig("num_classes must be at least 1".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        let a = &self.adam;
        if !(0.0..1.0).contains(&a.beta1) || !(0.0..1.0).contains(&a.beta2) || a.epsilon <= 0.0 {
            return Err(Error::InvalidConfig("Adam betas must lie in [0, 1) and epsilon be positive".into()));
        }
        Ok(())
    }

    /// Shapes of one branch's weight stack for `num_features` inputs.
    pub fn layer_shapes(&self, num_features: usize) -> Vec<(usize, usize)> {
        let mut shapes = Vec::with_capacity(self.num_layers + 1);
        shapes.push((num_features, self.hidden_dim));
        for _ in 1..self.num_layers {
            shapes.push((self.hidden_dim, self.hidden_dim));
        }
        shapes.push((self.hidden_dim, self.num_classes));
        shapes
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(ModelConfig::default().validate().is_ok());
        for bad in [
            ModelConfig { epochs: 0, ..Default::default() },
            ModelConfig { num_layers: 0, ..Default::default() },
            ModelConfig { hidden_dim: 0, ..Default::default() },
            ModelConfig { learning_rate: 0.0, ..Default::default() },
            ModelConfig { learning_rate: f64::NAN, ..Default::default() },
        ] {
            assert!(matches!(bad.validate(), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn shapes() {
        let cfg = ModelConfig { num_layers: 3, hidden_dim: 5, num_classes: 2, ..Default::default() };
        assert_eq!(cfg.layer_shapes(7), vec![(7, 5), (5, 5), (5, 5), (5, 2)]);
    }
}
