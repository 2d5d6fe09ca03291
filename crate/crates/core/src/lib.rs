//! Exact nonequilibrium steady state of the boundary-driven Hubbard chain,
//! built as a walking-graph matrix product operator and verified in exact
//! arithmetic.

pub mod amplitudes;
pub mod error;
pub mod exact;
pub mod graph;
pub mod par;
pub mod pauli;
pub mod lod;
pub mod ness;
pub mod observables;
pub mod proof;
