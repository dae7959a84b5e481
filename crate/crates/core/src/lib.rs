//! Detection and discovery of unreliable news domains from attributed webgraphs.

pub mod error;
pub mod baselines;
pub mod discovery;
pub mod eval;
pub mod experiment;
pub mod ingest;
pub mod nn;
pub mod webgraph;

pub use error::{Error, Result};
