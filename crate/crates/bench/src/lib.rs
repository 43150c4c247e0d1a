//! File I/O, experiment drivers and the `bse-bench` command line.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod flops;
pub mod mmio;

pub use error::BenchError;
pub use flops::{flop_estimate, FlopModel};
pub use mmio::{load_matrix_pair, save_matrix_pair};
