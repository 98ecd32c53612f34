//! Lattice boxes, quenched couplings, spins and exact Gibbs measures.

mod disorder;
mod gibbs;
pub mod io;
mod lattice;
mod profile;
mod spins;

pub use disorder::{CouplingField, CouplingLaw, DisorderSpec, Provenance};
pub use gibbs::{GibbsTable, DEFAULT_EXACT_CAP};
pub use lattice::{norm1, norm2, norm_inf, unit_neighbours, Edge, LatticeBox, Point, Vertex, MAX_SITES};
pub use profile::{plus_circuit_exists, profile_mk, MagnetizationProfile};
pub use spins::{hamiltonian, hamiltonian_plus, magnetization, Boundary, SpinConfig};
