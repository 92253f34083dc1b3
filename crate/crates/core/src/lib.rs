//! Low-rank plus sparse decomposition of video data matrices.
//!
//! Three routes are provided: principal component pursuit, a graph-regularized
//! ADMM solver with reweighted sparse thresholds, and a deep-unfolded network
//! whose layers mirror the solver's iterations with learned convolutions.

pub mod data;
pub mod error;
pub mod godec;
pub mod graph;
pub mod linalg;
pub mod network;
pub mod prox;
pub mod solver;
pub mod train;

pub use error::{Error, Result};
pub use linalg::{FrameDims, Mat};
