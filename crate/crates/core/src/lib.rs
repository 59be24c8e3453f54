//! Divisive community detection by edge clustering coefficient and edge
//! betweenness, with modularity-driven refinement.
//!
//! ```
//! use moddiv::{engine, fixtures};
//!
//! let g = fixtures::barbell();
//! let result = engine::run_ccr(&g, &engine::EngineConfig::default()).unwrap();
//! assert_eq!(result.best_partition.compact(), vec![0, 0, 0, 1, 1, 1]);
//! ```

pub mod bench;
pub mod cli;
pub mod engine;
pub mod export;
pub mod fixtures;
pub mod graph;
pub mod io;
pub mod measures;
pub mod modularity;
pub mod oracles;

pub use engine::{run_ccr, run_ccr_ebr, Algorithm, DetectionResult, EngineConfig};
pub use graph::{Graph, Subset, WorkingGraph};
pub use measures::MeasureKind;
pub use modularity::{modularity_q, Partition};
