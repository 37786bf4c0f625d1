//! Fastest distributed average consensus on generic star networks.
//!
//! A generic star network is a set of path branches hanging off one central
//! node; branch type `p` has `n[p]` copies of a path with `m[p]` nodes. The
//! K-cored variant replaces the single center with `K` mutually non-adjacent
//! centers, each wired to every branch head.
//!
//! The crate computes the optimal consensus weights for these topologies in
//! closed form, checks them against an eigen-decomposition of the full
//! weight matrix and against an independent numerical optimizer, and runs
//! the consensus iteration `x(t+1) = W x(t)` to compare against the usual
//! heuristic weightings.
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`topology`] | [`BranchSpec`] validation, node indexing, edge strata |
//! | [`weights`] | closed-form optimal weights, baselines, `K_max` |
//! | [`spectral`] | weight matrices, Jacobi eigensolver, block structure |
//! | [`numopt`] | direct convex minimization of the SLEM |
//! | [`sim`] | Monte-Carlo consensus traces |
//! | [`cli`] | table/CSV/JSON commands backing the `starcons` binary |
//!
//! ```
//! use star_consensus::{topology::BranchSpec, weights};
//!
//! let spec = BranchSpec::new(vec![1, 2, 3], vec![4, 3, 2], 1).unwrap();
//! let theta = weights::solve_theta(&spec).unwrap();
//! assert!((theta.slem - 0.9213).abs() < 1e-4);
//! ```

pub mod cli;
mod error;
pub mod numopt;
pub mod sim;
pub mod spectral;
pub mod topology;
pub mod weights;

pub use error::{Error, Result};
pub use spectral::{SpectralReport, WeightMatrix};
pub use topology::{BranchSpec, NodeId, StarNetwork, StratumId};
pub use weights::{Scheme, StratifiedWeights, ThetaSolution};
