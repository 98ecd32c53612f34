//! Simulation and analysis toolkit for the dilute Ising model in the phase
//! coexistence region.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: lattice boxes, quenched couplings, spin configurations,
//!   the Hamiltonian and exact Gibbs measures on small boxes.
//! * [`dynamics`]: continuous-time single-spin-flip Glauber dynamics,
//!   its graphical construction and Monte Carlo estimators.
//! * [`cluster`]: the random-cluster (FK) representation and the
//!   Edwards–Sokal coupling.
//! * [`tension`]: rectangles, disconnection events and surface tension.
//! * [`spectral`]: exact generators, spectral gap, mixing time and the
//!   decay inequalities they satisfy.
//! * [`barrier`]: macroscopic surface energies of phase profiles and the
//!   energy barrier for droplet removal.
//! * [`harness`]: configuration, orchestration and reporting.

pub mod barrier;
pub mod cluster;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod model;
pub mod seeding;
pub mod spectral;
pub mod stats;
pub mod tension;

pub use error::{Error, Result};
