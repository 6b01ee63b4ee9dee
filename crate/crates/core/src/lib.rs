//! Fault-tolerant error correction with triangular 4.8.8 color codes.

pub mod analysis;
pub mod circuit;
pub mod cli;
pub mod decoder;
pub mod error;
pub mod exact;
pub mod gf2;
pub mod lattice;
pub mod montecarlo;
pub mod noise;

pub use error::{Error, Result};
pub use lattice::{build_code, ColorCode, ErrorPattern};
