//! Floquet models: kicked top, kicked Ising chain, symmetry sectors and the
//! operator (Heisenberg-picture) superoperator.

pub mod ising;
mod sector;
pub mod spin;
pub mod superop;

pub use ising::{
    kicked_ising, momentum_sector, random_low_entanglement_seed, KickedIsing, KickedIsingParams,
};
pub use sector::{Axis, ProjectedUnitary, SectorKind, SymmetrySector};
pub use spin::{
    coherent_state, kicked_top, parity_sector, KickedTop, KickedTopFamily, KickedTopParams,
};
pub use superop::{vectorize_superoperator, Superoperator};
