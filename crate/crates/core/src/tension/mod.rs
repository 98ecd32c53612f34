//! Rectangles, the disconnection event between the two halves of their
//! boundary, and the surface tension `τ^J_R = -L^{-(d-1)} log Φ^{J,w}_R(D_R)`.

mod quenched;
mod rate;
mod rect;

pub use quenched::{
    dilution_event_check, estimate_quenched_tension, DilutionReport, QuenchedConfig, QuenchedRow, QuenchedSummary,
    QuenchedTable, TensionEvaluator,
};
pub use rate::{RateDomain, RateFunctionModel, RateValue};
pub use rect::{
    disconnection_prob, surface_tension_tau, tension_from, DisconnectionCache, DisconnectionEstimate, EvalMode,
    McBudget, RectSpec, Rectangle, TensionEstimate, RECT_EXACT_CAP,
};
