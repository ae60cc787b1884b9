//! Cartan decompositions of semisimple matrix Lie algebras, Mostow-compatible
//! inner products, and certified totally geodesic orbits in the space of
//! positive definite matrices.

pub mod cartan;
pub mod catalog;
pub mod document;
pub mod liealg;
pub mod numerics;
pub mod orbitmin;
pub mod spdspace;

#[cfg(test)]
pub(crate) mod test_fixtures;
