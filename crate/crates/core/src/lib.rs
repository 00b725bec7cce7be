pub mod align;
pub mod bigraph;
pub mod cli;
pub mod cluster;
pub mod complete;
pub mod corpus;
pub mod dedup;
pub mod describe;
pub mod error;
pub mod latent;
pub mod pipeline;
pub mod records;
pub mod stats;
pub mod synth;
pub mod timestamp;
pub mod tokenize;
mod unionfind;

pub use error::{Error, Result};
