//! Block-anisotropic summing norms of multilinear operators between
//! finite-dimensional ℓ_p spaces.
//!
//! Indices of sequences and block tuples are zero-based throughout.

pub mod blocks;
pub mod error;
pub mod multilinear;
pub mod rng;
pub mod sampling;
pub mod seqnorms;
pub mod spaces;
pub mod summing;
pub mod theorems;

pub use blocks::{Block, BlockKind};
pub use error::{Error, Result};
pub use multilinear::{compose, finite_type, sup_norm, MultiNormEstimate, MultiOperator};
pub use seqnorms::{class_norm, nested_norm, ClassSpec, ClassStack, JaggedArray, JaggedNode, VecSequence};
pub use spaces::{linear_map_norm, vec_norm, Estimate, Exponent, FiniteLpSpace, LinearMap, NormEstimate, Vector};
pub use summing::{block_image, block_value, summing_norm, CompatReport, SearchConfig, SummingEstimate};
