//! Exact-penalty Lipschitz surrogates for zero-norm and rank constrained problems,
//! and a multi-stage convex relaxation solver for low-rank plus sparse decomposition.

pub mod error;
pub mod experiment;
pub mod group;
pub mod matrix;
pub mod oracles;
pub mod phi;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use group::{GroupNorm, GroupPartition, GroupSurrogateParams};
pub use phi::{Generator, PhiConfig, PhiKind, PhiRegistry, PhiSpec};

pub use ndarray;
