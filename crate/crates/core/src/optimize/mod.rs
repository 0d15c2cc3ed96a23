//! Training losses, gradients, per-node descent, and split strategies.

pub mod autodiff;
mod gradient;
mod loss;
mod node;
mod schedule;
mod split;

pub use gradient::{finite_difference_gradient, gradient, provided_gradient, reverse_mode, reverse_mode_on, GradientMode, Objective};
pub use loss::{
    arap_frame_pairs, loss_acc, loss_arap, loss_track, loss_vel, total_loss, LossComponents, LossRecord, LossWeights,
    Supervision, LOSS_CSV_HEADER,
};
pub use node::{optimize_layer, optimize_node, NodeObjective, OptimConfig};
pub use schedule::{acceleration_ratio, schedule_cost};
pub use split::{balanced_split, flow_magnitudes, split_binary, split_flow, split_gradient, SplitStrategy};
