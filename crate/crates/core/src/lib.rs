//! Discrete Green's functions of strongly connected weighted digraphs,
//! computed from hitting times.
//!
//! The core identity is `G(i,j) = π_j (H(π,j) − H(i,j))`: Green's function is
//! the exit-frequency matrix of the optimal mixing rules shifted by a rank-one
//! term. The crate computes it through a dense pipeline
//! (`P → π → Z → H → G`) and cross-checks it by independent routes:
//!
//! * [`greens`]: the defining constraints `G(I − P) = I − 1πᵀ`, `G1 = 0`,
//!   exit frequencies and mixing measures;
//! * [`spectral`]: eigenvector formulas on undirected graphs;
//! * [`families`]: closed forms for complete, bipartite, path, tree, cycle,
//!   hypercube and toric graphs;
//! * [`duality`]: the reverse chain, forget distribution and π-core;
//! * [`montecarlo`]: seeded simulation.
//!
//! ```
//! use greenwalk::{generate, ChainAnalysis};
//!
//! let a = ChainAnalysis::of_graph(&generate::path(3)?, 0.0)?;
//! assert!((a.greens.get(0, 0) - 0.625).abs() < 1e-12);
//! assert!((a.mixing.t_mix - 1.5).abs() < 1e-12);
//! # Ok::<(), greenwalk::Error>(())
//! ```

pub mod analysis;
pub mod duality;
pub mod error;
pub mod families;
pub mod generate;
pub mod graph;
pub mod greens;
pub mod hitting;
pub mod montecarlo;
pub mod parse;
pub mod spectral;
pub mod tol;

pub use analysis::ChainAnalysis;
pub use duality::{duality_checks, duality_report, DualityReport};
pub use error::{Error, Result};
pub use families::{OracleReport, Quantity};
pub use graph::{stationary_distribution, Arc, Distribution, TransitionMatrix, WeightedDigraph};
pub use greens::{ExitFrequencyMatrix, GreensMatrix, MixingReport};
pub use hitting::HittingTimeMatrix;
pub use montecarlo::{SimStats, Simulator};
pub use parse::{parse_graph, GraphFormat};
pub use spectral::SpectralDecomposition;
