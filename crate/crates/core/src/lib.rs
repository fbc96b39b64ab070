//! Quantum convolutional neural network classifier workbench.
//!
//! Simulates an 8-qubit QCNN exactly on a dense statevector, trains it with
//! softmax cross-entropy and Adam, and compares it against a parameter-matched
//! single-kernel classical CNN on MNIST class subsets.

pub mod ansatz;
pub mod cli;
pub mod cnn;
pub mod data;
pub mod encoding;
pub mod error;
pub mod sim;
pub mod pipeline;
pub mod training;

pub use error::{Error, Result};
