//! Shared numerical machinery: optimizers, root finders, quadrature,
//! distribution wrappers, rank statistics and seed derivation.

pub mod dist;
pub mod quad;
pub mod rng;
pub mod solve;
pub mod stats;
