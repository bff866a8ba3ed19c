//! Benchmark problem families and their data generators.

pub mod dsl;
pub mod network;
pub mod num;
pub mod rng;

pub use dsl::{build_dsl_instance, generate_dsl, DslChannel, DslData, LogChannel};
pub use network::{shortest_paths, Network, Routing};
pub use num::{build_num_instance, generate_num, generate_num_with, synthetic_num, synthetic_num_with, Flow, LogUtility, NumData};
