use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::energy::{l1_distance, surface_energy_reduced, ReducedTension};
use super::profile::{P2, PhaseProfile};
use super::tension_fn::SurfaceTensionFn;
use crate::{Error, Result};

/// One-parameter families `s ∈ [0,1] ↦ v_s` from a droplet (`s = 0`) to
/// the plus phase (`s = 1`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    /// A horizontal chord sweeps down through a disk: chord angle `θ = πs`.
    ChordSweep { center: P2, radius: f64 },
    /// A flat front sweeps down through a square: remaining height
    /// `side (1 − s)`.
    FlatFront { center: P2, side: f64 },
}

impl Family {
    pub fn start(&self) -> PhaseProfile {
        match *self {
            Family::ChordSweep { center, radius } => PhaseProfile::Disk { center, radius },
            Family::FlatFront { center, side } => PhaseProfile::Square { center, side },
        }
    }

    pub fn at(&self, s: f64) -> PhaseProfile {
        let s = s.clamp(0.0, 1.0);
        match *self {
            Family::ChordSweep { center, radius } => PhaseProfile::DiskCap { center, radius, theta: PI * s },
            Family::FlatFront { center, side } => PhaseProfile::SquareSlab { center, side, height: side * (1.0 - s) },
        }
    }

    /// `sup_s ‖v_{s+δ} − v_s‖_{L¹} / δ` bound: the family is Lipschitz in
    /// `L¹` with this constant.
    pub fn l1_lipschitz(&self) -> f64 {
        match *self {
            // d/dθ of twice the removed area is 2 r² (1 − cos 2θ) ≤ 4 r²
            Family::ChordSweep { radius, .. } => 4.0 * PI * radius * radius,
            Family::FlatFront { side, .. } => 2.0 * side * side,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EvolutionPath {
    /// `v_0 = u₀, …, v_k = 1` with consecutive `L¹` jumps at most `epsilon`.
    Discrete { profiles: Vec<PhaseProfile>, epsilon: f64 },
    Continuous { family: Family },
}

impl EvolutionPath {
    pub fn validate(&self, u0: &PhaseProfile) -> Result<()> {
        match self {
            EvolutionPath::Discrete { profiles, epsilon } => {
                let (Some(first), Some(last)) = (profiles.first(), profiles.last()) else {
                    return Err(Error::Contract("empty evolution path".into()));
                };
                if first != u0 {
                    return Err(Error::Contract("path does not start at the initial profile".into()));
                }
                if !last.is_plus() {
                    return Err(Error::Contract("path does not end in the plus phase".into()));
                }
                for (k, w) in profiles.windows(2).enumerate() {
                    let d = l1_distance(&w[0], &w[1])?;
                    if d > epsilon + 1e-12 {
                        return Err(Error::Contract(format!("jump {k} has L1 size {d} > {epsilon}")));
                    }
                }
                Ok(())
            }
            EvolutionPath::Continuous { family } => {
                if &family.start() != u0 {
                    return Err(Error::Contract("family does not start at the initial profile".into()));
                }
                family.start().validate()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionValue {
    /// `sup F^r` along the path.
    pub sup: f64,
    /// Index (discrete) or parameter (continuous) of the maximizer.
    pub at: f64,
    /// `sup F^r − F^r(u₀)`.
    pub k_contribution: f64,
    pub f_start: f64,
}

const SCAN: usize = 1000;
const PARAM_TOL: f64 = 1e-10;

/// Maximize `f` on `[0,1]`: scan `SCAN + 1` points, then golden-section on
/// the bracket around every local maximum of the scan.
pub fn sup_on_unit(mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
    let xs: Vec<f64> = (0..=SCAN).map(|i| i as f64 / SCAN as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut best = (f64::NEG_INFINITY, 0.0);
    for i in 0..=SCAN {
        if ys[i] > best.0 {
            best = (ys[i], xs[i]);
        }
        let left = if i == 0 { f64::NEG_INFINITY } else { ys[i - 1] };
        let right = if i == SCAN { f64::NEG_INFINITY } else { ys[i + 1] };
        if ys[i] < left || ys[i] < right {
            continue;
        }
        let (mut a, mut b) = (xs[i.saturating_sub(1)], xs[(i + 1).min(SCAN)]);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        while b - a > PARAM_TOL {
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = f(d);
            }
        }
        for (y, x) in [(fc, c), (fd, d)] {
            if y > best.0 {
                best = (y, x);
            }
        }
    }
    best
}

/// Largest `F^r` along a path, and the barrier it realizes.
pub fn evaluate_evolution(
    path: &EvolutionPath,
    u0: &PhaseProfile,
    tr: &ReducedTension,
    tq: &SurfaceTensionFn,
) -> Result<EvolutionValue> {
    path.validate(u0)?;
    let f_start = surface_energy_reduced(u0, u0, tr, tq)?;
    let (sup, at) = match path {
        EvolutionPath::Discrete { profiles, .. } => {
            let mut best = (f64::NEG_INFINITY, 0.0);
            for (i, p) in profiles.iter().enumerate() {
                let v = surface_energy_reduced(p, u0, tr, tq)?;
                if v > best.0 {
                    best = (v, i as f64);
                }
            }
            best
        }
        EvolutionPath::Continuous { family } => {
            let mut err = None;
            let best = sup_on_unit(|s| match surface_energy_reduced(&family.at(s), u0, tr, tq) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    f64::NAN
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
            best
        }
    };
    Ok(EvolutionValue { sup, at, k_contribution: sup - f_start, f_start })
}

/// `2r[√(1−λ²) − λ arccos λ]`: barrier of a disk of radius `r` with
/// `τ^q ≡ 1` and constant `τ^r = λ`.
pub fn barrier_disk(r: f64, lambda: f64) -> Result<f64> {
    if !(r > 0.0 && r < 0.5) {
        return Err(Error::Domain(format!("radius {r} must lie in (0, 1/2)")));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Domain(format!("λ = {lambda} must lie in (0, 1)")));
    }
    Ok(2.0 * r * ((1.0 - lambda * lambda).sqrt() - lambda * lambda.acos()))
}

/// `2r(1 − λ)`: barrier of a square of side `2r` with `τ^q = ‖·‖₁` and
/// constant `τ^r = λ`. `r = 1/2` (the full box) is accepted.
pub fn barrier_square(r: f64, lambda: f64) -> Result<f64> {
    if !(r > 0.0 && r <= 0.5) {
        return Err(Error::Domain(format!("half-side {r} must lie in (0, 1/2]")));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Domain(format!("λ = {lambda} must lie in [0, 1]")));
    }
    Ok(2.0 * r * (1.0 - lambda))
}
