//! Vase-shaped fully connected autoencoder with per-node PReLU activations,
//! hand-written backpropagation and full-batch Adam training.

pub mod adam;
pub mod arch;
pub mod loss;
pub mod network;
pub mod prelu;
pub mod train;

pub use adam::{AdamHyper, AdamState};
pub use arch::Architecture;
pub use loss::{mean_distance, objective};
pub use network::{AeParams, ForwardCache, Gradients};
pub use prelu::{prelu, prelu_grad};
pub use train::{train, EpochRecord, TrainConfig, TrainOutcome};
