//! Heegaard Floer homology of rational surgeries on knots in integer
//! homology spheres, computed from the mapping cone, with d-invariants,
//! lens-space invariants and surgery obstructions.

pub mod cli;
pub mod cone;
pub mod f2;
pub mod fmod;
pub mod knotmodel;
pub mod numth;
pub mod obstruct;
pub mod rational;
pub mod shipped;
