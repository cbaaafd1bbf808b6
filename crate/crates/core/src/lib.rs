//! Tree permutations and their inversion graphs.
//!
//! A permutation `w` of `[n]` is a *tree permutation* when its inversion
//! graph `G_w` is a tree. There are `2^(n-2)` of them for `n >= 2`, each a
//! caterpillar, and they are in bijection with bit strings of length
//! `n - 2` through two insertion moves. This crate builds, counts, encodes,
//! samples and measures them, and checks the resulting laws by simulation.

pub mod codec;
pub mod counting;
pub mod cover;
pub mod error;
pub mod montecarlo;
pub mod perm;
pub mod stats;
pub mod structure;

pub use codec::{decode, encode, TreeCode};
pub use error::{Error, Result};
pub use perm::{build_graph, PermGraph, Permutation};
pub use structure::{Block, BlockDecomposition, CentralPath, Side};
