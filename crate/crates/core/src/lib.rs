//! Topological distance between sparse neural networks, and sparse
//! multilayer perceptrons trained from scratch with prune-and-regrow
//! connectivity.
//!
//! * [`topology`]: sparse layer connectivity, Erdős–Rényi initialisation,
//!   perturbation and the text interchange format.
//! * [`metric`]: the layer-wise, assignment-based sparse topology distance.
//! * [`network`]: SReLU MLPs restricted to a topology, with exact gradients
//!   and Nesterov SGD.
//! * [`settrain`]: fixed-topology and prune-and-regrow training, snapshots
//!   and the retrain protocol.
//! * [`data`]: Fashion-MNIST and CIFAR-10 loaders.
//! * [`cli`]: the experiment driver behind the `sparsetopo` binary.

pub mod cli;
pub mod data;
pub mod error;
pub mod metric;
pub mod network;
pub mod rng;
pub mod settrain;
pub mod stats;
pub mod topology;

mod fsutil;

pub use error::{Error, ParseError, Result};
