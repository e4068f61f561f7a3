//! Dense feed-forward networks with hand-written reverse-mode gradients and Adagrad.

pub mod adagrad;
pub mod checkpoint;
pub mod layer;
pub mod network;

pub use adagrad::{adagrad_update, AdagradConfig, AdagradState, DEFAULT_EPSILON};
pub use checkpoint::{Checkpoint, CheckpointEntry, ModelKind, CHECKPOINT_MAGIC};
pub use layer::{glorot_bound, Activation, DenseLayer};
pub use network::{GradientTape, LayerGrads, LayerSpec, MlpNetwork, NetworkGrads, NetworkSpec};
