//! Position-map regression network.
//!
//! An encoder of one convolution and a stack of residual blocks feeds a
//! decoder of transposed convolutions, all with kernel 4 and ReLU except the
//! linear output layer. The output is a 3-channel map the size of the input,
//! read as pixel coordinates after scaling by the input side.
//!
//! Gradients are computed by a hand-written reverse pass over the same
//! layer list the forward pass walks.

mod conv;
mod loss;
mod mask;
mod network;
mod synth;
mod tensor;
mod train;

pub use conv::{conv_forward, conv_transpose_forward, same_padding, ConvWeights};
pub use loss::{weighted_loss, weighted_loss_with, LossKind, LOSS_EPSILON};
pub use mask::{
    default_weight_mask, landmarks, procedural_weight_mask, uv_to_face, FACE_RADIUS,
    MASK_RESOLUTION, WEIGHT_FACE, WEIGHT_FEATURES, WEIGHT_LANDMARK, WEIGHT_OUTSIDE,
};
pub use network::{
    backward, residual_block_forward, Gradients, Network, NetworkSpec, ResidualWeights, Stage,
    INITIAL_BIAS, KERNEL,
};
pub use synth::{synthetic_dataset, synthetic_sample, FaceParams};
pub use tensor::Tensor;
pub use train::{train, Optimizer, Sample, TrainConfig, Trained, MOMENTUM};
