//! Littlewood–Paley blocks, Besov norms, Bony paraproducts, smooth cutoffs
//! and heat commutators.

mod blocks;
mod partition;
mod products;

pub use blocks::{besov_norm, besov_norm_matrix, lp_norm, paley_block, paley_block_matrix};
pub use partition::{chi, rho, CutoffPair, DyadicPartition};
pub use products::*;
