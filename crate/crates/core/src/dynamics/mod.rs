//! Continuous-time single-spin-flip Glauber dynamics on a finite box with a
//! frozen exterior.
//!
//! Paths come from a graphical construction: every site carries a Poisson
//! clock of intensity `clock` (see [`RateModel::clock`]), and at a ring with
//! uniform `u` the new spin is `+` iff `u` is at least the probability of
//! ending at `-`. Sharing rings and uniforms between copies gives the
//! monotone coupling used by [`simulate_coupled`].

mod estimate;
mod rates;
mod sim;

pub use estimate::{
    estimate_autocorrelation, estimate_semigroup, flip_count_bound_check, AutocorrelationConfig,
    AutocorrelationCurve, CurvePoint, EquilibriumSampler, FlipCountReport, VarianceMethod,
};
pub use rates::{
    check_rate_axioms, exhaustive_probes, reversibility_defect, AxiomReport, AxiomResult, Probe, RateKind,
    RateModel,
};
pub use sim::{evolve, parse_trajectory_csv, simulate, simulate_coupled, DynamicsSeed, Event, Trajectory, TrajectoryRecord};
