use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use super::profile::{Face, GridProfile, P2, PhaseProfile, Piece};
use super::quad::integrate_pieces;
use super::tension_fn::SurfaceTensionFn;
use crate::{Error, Result};

const GEOM_TOL: f64 = 1e-12;
const QUAD_TOL: f64 = 1e-12;

/// Reduced tension `τ^r` on the boundary of the initial profile: the
/// constant `lambda`, overridden on individual grid faces by `patches`.
/// `epsilon` is the strict-gap witness `τ^min + ε < τ^r`; it is validated
/// but plays no role in any functional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedTension {
    pub lambda: f64,
    #[serde(default)]
    pub patches: Vec<(Face, f64)>,
    #[serde(default)]
    pub epsilon: f64,
}

impl ReducedTension {
    pub fn constant(lambda: f64) -> Self {
        ReducedTension { lambda, patches: Vec::new(), epsilon: 0.0 }
    }

    fn face_map(&self) -> HashMap<Face, f64> {
        self.patches.iter().copied().collect()
    }

    /// `0 < τ^r ≤ τ^q(n)` on every boundary piece of `u0`.
    pub fn validate(&self, u0: &PhaseProfile, tq: &SurfaceTensionFn) -> Result<()> {
        tq.validate()?;
        let ok = |v: f64, cap: f64| v.is_finite() && v > 0.0 && v <= cap + GEOM_TOL;
        match u0 {
            PhaseProfile::Grid(g) => {
                let map = self.face_map();
                for (f, _) in g.interface() {
                    let v = map.get(&f).copied().unwrap_or(self.lambda);
                    if !ok(v, tq.eval(f.normal())) {
                        return Err(Error::Domain(format!("τ^r = {v} on face {f:?} is outside (0, τ^q]")));
                    }
                }
            }
            _ => {
                if !self.patches.is_empty() {
                    return Err(Error::Unsupported("face patches need a grid initial profile".into()));
                }
                for p in u0.pieces()? {
                    let cap = match p {
                        Piece::Seg { a, b } => tq.eval(seg_normal(a, b)),
                        Piece::Arc { .. } => tq.min_over_normals(),
                    };
                    if !ok(self.lambda, cap) {
                        return Err(Error::Domain(format!("τ^r = {} exceeds τ^q = {cap} on {p:?}", self.lambda)));
                    }
                }
            }
        }
        Ok(())
    }

    /// The strict gap `τ^min + ε < τ^r`, with `ε > 0`.
    pub fn validate_gap(&self, tau_min: f64) -> Result<()> {
        let lowest = self.patches.iter().map(|p| p.1).fold(self.lambda, f64::min);
        if !(self.epsilon > 0.0 && tau_min + self.epsilon < lowest) {
            return Err(Error::Domain(format!(
                "strict gap fails: τ^min + ε = {} is not below τ^r = {lowest}",
                tau_min + self.epsilon
            )));
        }
        Ok(())
    }
}

/// Outer unit normal of a counterclockwise segment.
pub fn seg_normal(a: P2, b: P2) -> P2 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let l = dx.hypot(dy);
    [dy / l, -dx / l]
}

/// `∫_{∂*u ∖ ∂*u₀} τ^q`, `∫ τ^r` over the part of `∂*u ∩ ∂*u₀` where both
/// outer normals agree (contact) and over the part where they are opposite
/// (anti-contact: the two regions touch from outside).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundarySplit {
    pub free: f64,
    pub contact: f64,
    pub anti_contact: f64,
}

impl BoundarySplit {
    /// `F^r(u)`.
    pub fn reduced(&self) -> f64 {
        self.free + self.contact + self.anti_contact
    }

    /// `F^{r,−}(u)`.
    pub fn signed(&self) -> f64 {
        self.free - self.contact - self.anti_contact
    }
}

/// `r ∫_a^b τ^q(cos φ, sin φ) dφ`.
pub(crate) fn arc_tension(tq: &SurfaceTensionFn, r: f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    if let SurfaceTensionFn::Isotropic { value } = tq {
        return value * r * (b - a);
    }
    // kinks of lattice-symmetric tensions sit on the axes and diagonals
    let first = (a / (FRAC_PI_2 / 2.0)).ceil() as i64;
    let last = (b / (FRAC_PI_2 / 2.0)).floor() as i64;
    let mut br = vec![a, b];
    br.extend((first..=last).map(|k| k as f64 * FRAC_PI_2 / 2.0));
    r * integrate_pieces(|phi| tq.at_angle(phi), &br, QUAD_TOL)
}

/// Covered parameter intervals of piece `p` by the pieces of `other`:
/// `(lo, hi, same_orientation)`; segments are parameterized by `[0,1]`,
/// arcs by angle.
fn coverage(p: &Piece, other: &[Piece]) -> Vec<(f64, f64, bool)> {
    let mut out = Vec::new();
    for q in other {
        match (*p, *q) {
            (Piece::Seg { a, b }, Piece::Seg { a: c, b: d }) => {
                let u = [b[0] - a[0], b[1] - a[1]];
                let len2 = u[0] * u[0] + u[1] * u[1];
                let scale = len2.sqrt();
                let cross = |w: P2| (u[0] * (w[1] - a[1]) - u[1] * (w[0] - a[0])) / scale;
                if cross(c).abs() > GEOM_TOL || cross(d).abs() > GEOM_TOL {
                    continue;
                }
                let t = |w: P2| (u[0] * (w[0] - a[0]) + u[1] * (w[1] - a[1])) / len2;
                let (tc, td) = (t(c), t(d));
                let (lo, hi) = (tc.min(td).max(0.0), tc.max(td).min(1.0));
                if hi - lo > GEOM_TOL / scale {
                    out.push((lo, hi, td > tc));
                }
            }
            (Piece::Arc { c, r, start, end }, Piece::Arc { c: c2, r: r2, start: s2, end: e2 }) => {
                if (c[0] - c2[0]).abs() > GEOM_TOL || (c[1] - c2[1]).abs() > GEOM_TOL || (r - r2).abs() > GEOM_TOL {
                    continue;
                }
                for k in -1..=1 {
                    let shift = k as f64 * TAU;
                    let (lo, hi) = (start.max(s2 + shift), end.min(e2 + shift));
                    if hi - lo > GEOM_TOL {
                        out.push((lo, hi, true));
                    }
                }
            }
            _ => {}
        }
    }
    out
}

fn merge(mut iv: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    iv.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (a, b) in iv {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

fn split_pieces(u: &[Piece], u0: &[Piece], lambda: f64, tq: &SurfaceTensionFn) -> BoundarySplit {
    let mut s = BoundarySplit::default();
    for p in u {
        let cov = coverage(p, u0);
        let same = merge(cov.iter().filter(|c| c.2).map(|c| (c.0, c.1)).collect());
        let opp = merge(cov.iter().filter(|c| !c.2).map(|c| (c.0, c.1)).collect());
        let all = merge(same.iter().chain(&opp).copied().collect());
        let measure = |iv: &[(f64, f64)]| iv.iter().map(|(a, b)| b - a).sum::<f64>();
        match *p {
            Piece::Seg { a, b } => {
                let len = p.length();
                s.free += tq.eval(seg_normal(a, b)) * len * (1.0 - measure(&all));
                s.contact += lambda * len * measure(&same);
                s.anti_contact += lambda * len * measure(&opp);
            }
            Piece::Arc { r, start, end, .. } => {
                let mut free = arc_tension(tq, r, start, end);
                for (a, b) in &all {
                    free -= arc_tension(tq, r, *a, *b);
                }
                s.free += free;
                s.contact += lambda * r * measure(&same);
                s.anti_contact += lambda * r * measure(&opp);
            }
        }
    }
    s
}

fn split_grid(u: &GridProfile, u0: &GridProfile, tr: &ReducedTension, tq: &SurfaceTensionFn) -> Result<BoundarySplit> {
    u.compatible(u0)?;
    let h = 1.0 / u.n() as f64;
    let map = tr.face_map();
    let tau_v = tq.eval([1.0, 0.0]);
    let tau_h = tq.eval([0.0, 1.0]);
    let mut s = BoundarySplit::default();
    for (f, side) in u.interface() {
        match u0.minus_side(f) {
            None => s.free += h * if matches!(f, Face::V { .. }) { tau_v } else { tau_h },
            Some(side0) => {
                let r = h * map.get(&f).copied().unwrap_or(tr.lambda);
                if side0 == side {
                    s.contact += r;
                } else {
                    s.anti_contact += r;
                }
            }
        }
    }
    Ok(s)
}

/// Boundary of `u` split against the boundary of `u0`. Grid profiles pair
/// only with grids of the same side (faces are matched exactly).
pub fn boundary_split(u: &PhaseProfile, u0: &PhaseProfile, tr: &ReducedTension, tq: &SurfaceTensionFn) -> Result<BoundarySplit> {
    match (u, u0) {
        (PhaseProfile::Plus, _) => Ok(BoundarySplit::default()),
        (PhaseProfile::Grid(g), PhaseProfile::Grid(g0)) => split_grid(g, g0, tr, tq),
        (PhaseProfile::Grid(g), PhaseProfile::Plus) => {
            split_grid(g, &GridProfile::plus(g.n(), 0)?, tr, tq)
        }
        (PhaseProfile::Grid(_), _) | (_, PhaseProfile::Grid(_)) => {
            Err(Error::Unsupported("grid and continuum profiles have no common boundary representation".into()))
        }
        _ => {
            if !tr.patches.is_empty() {
                return Err(Error::Unsupported("face patches need grid profiles".into()));
            }
            Ok(split_pieces(&u.pieces()?, &u0.pieces()?, tr.lambda, tq))
        }
    }
}

/// `F^q(u) = ∫_{∂*u} τ^q(n) dH¹`.
pub fn surface_energy_quenched(u: &PhaseProfile, tq: &SurfaceTensionFn) -> Result<f64> {
    Ok(match u {
        PhaseProfile::Grid(g) => {
            let h = 1.0 / g.n() as f64;
            g.interface().iter().map(|(f, _)| h * tq.eval(f.normal())).sum()
        }
        _ => u
            .pieces()?
            .iter()
            .map(|p| match *p {
                Piece::Seg { a, b } => tq.eval(seg_normal(a, b)) * p.length(),
                Piece::Arc { r, start, end, .. } => arc_tension(tq, r, start, end),
            })
            .sum(),
    })
}

/// `F^r(u)`: `τ^r` on `∂*u ∩ ∂*u₀`, `τ^q` elsewhere.
pub fn surface_energy_reduced(u: &PhaseProfile, u0: &PhaseProfile, tr: &ReducedTension, tq: &SurfaceTensionFn) -> Result<f64> {
    Ok(boundary_split(u, u0, tr, tq)?.reduced())
}

/// `F^{r,−}(u) = ∫_{∂*u∖∂*u₀} τ^q − ∫_{∂*u∩∂*u₀} τ^r`.
pub fn surface_energy_signed(u: &PhaseProfile, u0: &PhaseProfile, tr: &ReducedTension, tq: &SurfaceTensionFn) -> Result<f64> {
    Ok(boundary_split(u, u0, tr, tq)?.signed())
}

/// `∫|u − v|` over `[0,1]²` (twice the area of the symmetric difference).
pub fn l1_distance(u: &PhaseProfile, v: &PhaseProfile) -> Result<f64> {
    match (u, v) {
        (PhaseProfile::Grid(a), PhaseProfile::Grid(b)) if a.n() == b.n() => {
            let diff = a.cells().iter().zip(b.cells()).filter(|(x, y)| x != y).count();
            return Ok(2.0 * diff as f64 / (a.n() * a.n()) as f64);
        }
        (PhaseProfile::Plus, w) | (w, PhaseProfile::Plus) => return Ok(2.0 * w.area()),
        _ if u == v => return Ok(0.0),
        _ => {}
    }
    let mut br = u.breakpoints();
    br.extend(v.breakpoints());
    br.extend([0.0, 1.0]);
    br.retain(|x| (0.0..=1.0).contains(x));
    let len = |iv: &[(f64, f64)]| iv.iter().map(|(a, b)| b - a).sum::<f64>();
    let area = integrate_pieces(
        |x| {
            let (a, b) = (u.slice(x), v.slice(x));
            let mut inter = 0.0;
            for p in &a {
                for q in &b {
                    inter += (p.1.min(q.1) - p.0.max(q.0)).max(0.0);
                }
            }
            len(&a) + len(&b) - 2.0 * inter
        },
        &br,
        1e-12,
    );
    Ok(2.0 * area)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn disk() -> PhaseProfile {
        PhaseProfile::disk([0.5, 0.5], 0.25)
    }

    #[test]
    fn quenched_energies() {
        let iso = SurfaceTensionFn::isotropic(1.0);
        assert!((surface_energy_quenched(&disk(), &iso).unwrap() - 2.0 * PI * 0.25).abs() < 1e-15);
        let sq = PhaseProfile::square([0.5, 0.5], 0.3);
        assert!((surface_energy_quenched(&sq, &SurfaceTensionFn::L1).unwrap() - 1.2).abs() < 1e-14);
        assert_eq!(surface_energy_quenched(&PhaseProfile::Plus, &iso).unwrap(), 0.0);
        // ℓ¹ perimeter of a disk is 8r
        assert!((surface_energy_quenched(&disk(), &SurfaceTensionFn::L1).unwrap() - 2.0).abs() < 1e-11);
    }

    #[test]
    fn reduced_and_signed_on_disk_family() {
        let iso = SurfaceTensionFn::isotropic(1.0);
        let tr = ReducedTension::constant(0.5);
        let r = 0.25;
        assert!((surface_energy_reduced(&disk(), &disk(), &tr, &iso).unwrap() - 2.0 * PI * r * 0.5).abs() < 1e-14);
        for theta in [0.3, 1.0, PI / 2.0, 2.5] {
            let u = PhaseProfile::DiskCap { center: [0.5, 0.5], radius: r, theta };
            let want = r * 0.5 * (2.0 * PI - 2.0 * theta) + 2.0 * r * theta.sin();
            assert!((surface_energy_reduced(&u, &disk(), &tr, &iso).unwrap() - want).abs() < 1e-13);
        }
        let half = PhaseProfile::DiskCap { center: [0.5, 0.5], radius: r, theta: PI / 2.0 };
        let want = 2.0 * r - PI * r * 0.5;
        assert!((surface_energy_signed(&half, &disk(), &tr, &iso).unwrap() - want).abs() < 1e-13);
        assert!((surface_energy_signed(&disk(), &disk(), &tr, &iso).unwrap() + 2.0 * PI * r * 0.5).abs() < 1e-14);
        let far = PhaseProfile::disk([0.2, 0.2], 0.1);
        assert_eq!(
            surface_energy_signed(&far, &disk(), &tr, &iso).unwrap(),
            surface_energy_quenched(&far, &iso).unwrap()
        );
    }

    #[test]
    fn anti_contact_segments() {
        let l1 = SurfaceTensionFn::L1;
        let tr = ReducedTension::constant(0.5);
        let left = PhaseProfile::Polygon { vertices: vec![[0.2, 0.2], [0.5, 0.2], [0.5, 0.6], [0.2, 0.6]] };
        let right = PhaseProfile::Polygon { vertices: vec![[0.5, 0.3], [0.7, 0.3], [0.7, 0.5], [0.5, 0.5]] };
        let s = boundary_split(&right, &left, &tr, &l1).unwrap();
        assert!((s.anti_contact - 0.5 * 0.2).abs() < 1e-15 && s.contact == 0.0);
    }

    #[test]
    fn l1_distances() {
        let r = 0.25;
        assert!((l1_distance(&disk(), &PhaseProfile::Plus).unwrap() - 2.0 * PI * r * r).abs() < 1e-15);
        let a = PhaseProfile::square([0.5, 0.5], 0.4);
        let b = PhaseProfile::square([0.5, 0.5], 0.2);
        assert!((l1_distance(&a, &b).unwrap() - 2.0 * (0.16 - 0.04)).abs() < 1e-12);
        let d2 = PhaseProfile::disk([0.55, 0.5], 0.2);
        let ab = l1_distance(&disk(), &d2).unwrap();
        let ba = l1_distance(&d2, &disk()).unwrap();
        assert!((ab - ba).abs() < 1e-12 && ab > 0.0);
        // grid against continuum uses the same slices
        let g = PhaseProfile::Grid(GridProfile::block(4, 0, 1, 1, 2).unwrap());
        assert!((l1_distance(&g, &a).unwrap() - 2.0 * (0.25 - 0.16)).abs() < 1e-12);
    }

    #[test]
    fn grid_pairs_only_with_grids() {
        let g = PhaseProfile::Grid(GridProfile::block(4, 0, 1, 1, 2).unwrap());
        let e = surface_energy_reduced(&g, &disk(), &ReducedTension::constant(0.5), &SurfaceTensionFn::L1);
        assert!(matches!(e, Err(Error::Unsupported(_))));
    }
}
