use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::energy::{seg_normal, surface_energy_reduced, ReducedTension};
use super::evolution::{barrier_disk, barrier_square, evaluate_evolution, EvolutionPath, Family};
use super::minimax::barrier_grid_minimax;
use super::profile::{Face, PhaseProfile, Piece};
use super::quad::integrate_pieces;
use super::tension_fn::SurfaceTensionFn;
use crate::tension::{RateDomain, RateFunctionModel};
use crate::{Error, Result};

fn rate_at(model: &RateFunctionModel, n: [f64; 2], tau: f64) -> Result<f64> {
    let v = model.eval(&n, tau)?;
    if v.domain != RateDomain::Inside {
        return Err(Error::Domain(format!("rate function undefined at τ^r = {tau} for normal {n:?} ({:?})", v.domain)));
    }
    Ok(v.value)
}

/// `I^r(u₀) = ∫_{∂*u₀} I_n(τ^r) dH¹`.
pub fn dilution_cost(u0: &PhaseProfile, tr: &ReducedTension, model: &RateFunctionModel) -> Result<f64> {
    model.validate()?;
    match u0 {
        PhaseProfile::Grid(g) => {
            let h = 1.0 / g.n() as f64;
            let patches: std::collections::HashMap<Face, f64> = tr.patches.iter().copied().collect();
            let mut total = 0.0;
            for (f, _) in g.interface() {
                total += h * rate_at(model, f.normal(), patches.get(&f).copied().unwrap_or(tr.lambda))?;
            }
            Ok(total)
        }
        _ => {
            let mut total = 0.0;
            for p in u0.pieces()? {
                total += match p {
                    Piece::Seg { a, b } => p.length() * rate_at(model, seg_normal(a, b), tr.lambda)?,
                    Piece::Arc { r, start, end, .. } => {
                        rate_at(model, [start.cos(), start.sin()], tr.lambda)?;
                        let first = (start / FRAC_PI_2).ceil() as i64;
                        let last = (end / FRAC_PI_2).floor() as i64;
                        let mut br = vec![start, end];
                        br.extend((first..=last).map(|k| k as f64 * FRAC_PI_2));
                        let mut err = None;
                        let v = integrate_pieces(
                            |phi| match rate_at(model, [phi.cos(), phi.sin()], tr.lambda) {
                                Ok(v) => v,
                                Err(e) => {
                                    err.get_or_insert(e);
                                    f64::NAN
                                }
                            },
                            &br,
                            1e-12,
                        );
                        if let Some(e) = err {
                            return Err(e);
                        }
                        r * v
                    }
                };
            }
            Ok(total)
        }
    }
}

/// Candidate initial condition for the exponent: profile, reduced and
/// quenched tensions, and the rate-function model. `jump_cells` sets the
/// jump size for grid profiles (default 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub u0: PhaseProfile,
    pub tau_r: ReducedTension,
    pub tau_q: SurfaceTensionFn,
    pub rate: RateFunctionModel,
    #[serde(default)]
    pub jump_cells: Option<usize>,
}

/// `K^r(u₀)`: closed form for a disk with `τ^q ≡ 1` and a square with
/// `τ^q = ‖·‖₁`, the chord or flat-front family for other tensions (an
/// upper bound there), grid minimax for grids.
pub fn candidate_barrier(c: &Candidate) -> Result<f64> {
    c.u0.validate()?;
    c.tau_r.validate(&c.u0, &c.tau_q)?;
    let family = match c.u0 {
        PhaseProfile::Disk { center, radius } => {
            if c.tau_q == SurfaceTensionFn::isotropic(1.0) {
                return barrier_disk(radius, c.tau_r.lambda);
            }
            Family::ChordSweep { center, radius }
        }
        PhaseProfile::Square { center, side } => {
            if c.tau_q == SurfaceTensionFn::L1 {
                return barrier_square(side / 2.0, c.tau_r.lambda);
            }
            Family::FlatFront { center, side }
        }
        PhaseProfile::Grid(_) => {
            return Ok(barrier_grid_minimax(&c.u0, &c.tau_r, &c.tau_q, c.jump_cells.unwrap_or(1))?.k_hat);
        }
        PhaseProfile::Plus => return Ok(0.0),
        _ => return Err(Error::Unsupported("no barrier evaluator for this representation".into())),
    };
    Ok(evaluate_evolution(&EvolutionPath::Continuous { family }, &c.u0, &c.tau_r, &c.tau_q)?.k_contribution)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub dilution: f64,
    pub energy: f64,
    pub barrier: f64,
    /// `(I^r + λ F^r) / K^r`, `+∞` when `K^r = 0`.
    pub ratio: f64,
}

pub fn score(c: &Candidate, lambda: f64) -> Result<CandidateScore> {
    let barrier = candidate_barrier(c)?;
    let dilution = dilution_cost(&c.u0, &c.tau_r, &c.rate)?;
    let energy = surface_energy_reduced(&c.u0, &c.u0, &c.tau_r, &c.tau_q)?;
    let ratio = if barrier > 0.0 { (dilution + lambda * energy) / barrier } else { f64::INFINITY };
    Ok(CandidateScore { dilution, energy, barrier, ratio })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XLambda {
    /// Smallest ratio; `+∞` when no candidate has a positive barrier.
    pub value: f64,
    pub argmin: Option<usize>,
    pub scores: Vec<CandidateScore>,
}

/// `X_λ` over the supplied candidates: an upper bound on the infimum over
/// all initial conditions.
pub fn exponent_xlambda(candidates: &[Candidate], lambda: f64) -> Result<XLambda> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("λ = {lambda} must be finite and nonnegative")));
    }
    let scores = candidates.iter().map(|c| score(c, lambda)).collect::<Result<Vec<_>>>()?;
    let mut best = (f64::INFINITY, None);
    for (i, s) in scores.iter().enumerate() {
        if s.ratio < best.0 {
            best = (s.ratio, Some(i));
        }
    }
    Ok(XLambda { value: best.0, argmin: best.1, scores })
}

/// `κ = d / X₀` (`0` when `X₀ = +∞`).
pub fn kappa(candidates: &[Candidate], d: usize) -> Result<f64> {
    let x = exponent_xlambda(candidates, 0.0)?.value;
    Ok(if x.is_infinite() { 0.0 } else { d as f64 / x })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstrainedSquare {
    pub lambda: f64,
    /// `sup_m min(F¹(m), F²(m))`.
    pub value: f64,
    /// Where the supremum is attained.
    pub m0: f64,
    /// `1 + 3λ`.
    pub unconstrained: f64,
    pub margin: f64,
    pub strict: bool,
}

/// Square of side one: `F¹(m) = 1 + (2 − m)λ` and
/// `F²(m) = 4λ + 2(1 − λ)√((1 + m)/2)` over `m ∈ [−1, 1]`.
pub fn constrained_square_profiles(lambda: f64, m: f64) -> (f64, f64) {
    (1.0 + (2.0 - m) * lambda, 4.0 * lambda + 2.0 * (1.0 - lambda) * ((1.0 + m) / 2.0).sqrt())
}

pub fn constrained_barrier_square(lambda: f64) -> Result<ConstrainedSquare> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Domain(format!("λ = {lambda} must lie in (0, 1)")));
    }
    // F¹ − F² decreases strictly in m, so min(F¹, F²) peaks at the crossing
    let diff = |m: f64| {
        let (a, b) = constrained_square_profiles(lambda, m);
        a - b
    };
    let m0 = if diff(1.0) >= 0.0 {
        1.0
    } else if diff(-1.0) <= 0.0 {
        -1.0
    } else {
        let (mut lo, mut hi) = (-1.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if diff(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let (a, b) = constrained_square_profiles(lambda, m0);
    let value = a.min(b);
    let unconstrained = 1.0 + 3.0 * lambda;
    Ok(ConstrainedSquare { lambda, value, m0, unconstrained, margin: unconstrained - value, strict: value < unconstrained })
}
