//! The dual-branch graph convolutional network.
//!
//! Both branches share the same architecture, `l` ReLU convolutions followed
//! by a softmax convolution over the classes, but never share weights. The
//! source branch propagates with `Â = A + I` (out-neighbourhoods), the target
//! branch with `Âᵀ` (in-neighbourhoods). Each branch is fit against its own
//! masked cross-entropy; the two losses are never summed.

mod adam;
mod backward;
mod checkpoint;
mod config;
mod forward;
mod gradcheck;
mod loss;
mod params;
mod train;

pub use adam::adam_step;
pub use backward::{backward, backward_with_adjoint};
pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint};
pub use config::{AdamHyper, LossReduction, ModelConfig};
pub use forward::{embed_branch, forward_branch, BranchActivations};
pub use gradcheck::{check_gradients, check_gradients_at, relative_error, GradCheckReport, ParamCheck, FD_STEP};
pub use loss::{masked_cross_entropy, masked_cross_entropy_with, TrainMask, LOG_CLAMP};
pub use params::{init_params, AdamState, Branch, ModelParams, Moments};
pub use train::{
    branch_loss_and_gradients, continue_training, train, BranchOperator, EpochLoss, Propagation, TrainOutcome,
};
