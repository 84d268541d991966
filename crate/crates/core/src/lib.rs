//! Rare-aware autoencoder training.
//!
//! A dense autoencoder trained with an entropy-weighted reconstruction loss
//! and a hard-example replay scheduler, plus a damped-pendulum dataset and
//! the metrics used to judge reconstruction of rare frames.

pub mod adam;
pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod data;
pub mod entropy;
pub mod error;
pub mod exec;
pub mod loss;
pub mod metrics;
pub mod nn;
pub mod sampling;
pub mod tensor;
pub mod trainer;

pub use error::{Error, Result};
pub use exec::Exec;
pub use tensor::{DenseMatrix, ImageBatch, ImageDims};
