//! Random-cluster (Fortuin–Kasteleyn) measures with quenched couplings and
//! the Edwards–Sokal coupling to the spin system.

mod es;
mod fk;
mod graph;
pub mod io;

pub use es::{es_joint_exact, es_sample_omega_given_sigma, es_sample_sigma_given_omega, EsTable, ES_EXACT_CAP};
pub use fk::{check_holley, edge_probability, fk_exact, FkEdgeChain, FkParams, FkTable, FK_EXACT_CAP, HOLLEY_CAP};
pub use graph::{cluster_count, ClusterCounter, EdgeGraph, UnionFind, Wiring};
