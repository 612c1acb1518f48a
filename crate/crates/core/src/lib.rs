//! Audio compression by compressive sensing (random Gaussian measurements
//! recovered with OMP or basis pursuit) and by K-sparse FFT with bit-packed
//! coefficients, including a sublinear-time sparse FFT.
//!
//! The `examples/` directory shows each capability end to end.

pub mod audio;
pub mod bench;
pub mod cli;
pub mod codec;
pub mod container;
pub mod corpus;
pub mod cs;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod recovery;
pub mod rng;
pub mod sfft;
pub mod transforms;

pub use error::{Error, Result};
