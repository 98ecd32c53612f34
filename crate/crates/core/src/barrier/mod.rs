//! Macroscopic layer in two dimensions: phase profiles on `[0,1]²`,
//! quenched, reduced and signed surface energies, evolution paths and
//! their energy barrier, the grid minimax barrier, closed forms, and the
//! exponents built from them.

mod decompose;
mod energy;
mod evolution;
mod exponents;
mod minimax;
mod profile;
mod quad;
mod tension_fn;
mod wulff;

pub use decompose::{decompose_droplets, decompose_symmetric, DropletDecomposition, SymmetricDecomposition};
pub use energy::{
    boundary_split, l1_distance, seg_normal, surface_energy_quenched, surface_energy_reduced, surface_energy_signed,
    BoundarySplit, ReducedTension,
};
pub use evolution::{
    barrier_disk, barrier_square, evaluate_evolution, sup_on_unit, EvolutionPath, EvolutionValue, Family,
};
pub use exponents::{
    candidate_barrier, constrained_barrier_square, constrained_square_profiles, dilution_cost, exponent_xlambda, kappa,
    score, Candidate, CandidateScore, ConstrainedSquare, XLambda,
};
pub use minimax::{barrier_grid_minimax, barrier_grid_minimax_dijkstra, GridBarrier, ProfileGraph, MINIMAX_CAP};
pub use profile::{parse_profile_json, signed_area, Face, GridProfile, MinusSide, P2, PhaseProfile, Piece, GRID_MAX};
pub use quad::{integrate, integrate_pieces};
pub use tension_fn::{angle_of, SurfaceTensionFn};
pub use wulff::{isoperimetric_sides, wulff_shape, WulffShape};
