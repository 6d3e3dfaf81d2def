//! Small differentiable kernel: tensors, a recording tape for reverse-mode
//! gradients, dense / graph-convolution / graph-attention layers, Adam, and
//! a binary checkpoint format.

mod adam;
mod checkpoint;
mod layers;
mod model;
mod params;
mod tape;
mod tensor;

pub use adam::Adam;
pub use checkpoint::{Checkpoint, CHECKPOINT_VERSION};
pub use layers::{dense_forward, gat_forward, gcn_forward, Activation, GatOutput, ATTENTION_SLOPE};
pub use model::{ArchitectureSpec, GraphBatch, GraphSample, LayerSpec, QNetwork};
pub use params::{glorot_init, glorot_init_with, ParameterSet};
pub use tape::{Neighbors, NodeId, Tape};
pub use tensor::Tensor;
