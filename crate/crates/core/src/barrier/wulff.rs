use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::energy::surface_energy_quenched;
use super::profile::{signed_area, P2, PhaseProfile};
use super::tension_fn::SurfaceTensionFn;
use crate::{Error, Result};

/// Polygonal outer approximation of `W = {z : z·n ≤ τ(n) ∀n}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WulffShape {
    /// Counterclockwise.
    pub vertices: Vec<P2>,
}

impl WulffShape {
    pub fn area(&self) -> f64 {
        signed_area(&self.vertices).abs()
    }

    pub fn contains(&self, z: P2) -> bool {
        let m = self.vertices.len();
        (0..m).all(|k| {
            let (a, b) = (self.vertices[k], self.vertices[(k + 1) % m]);
            (b[0] - a[0]) * (z[1] - a[1]) - (b[1] - a[1]) * (z[0] - a[0]) >= -1e-12
        })
    }

    /// `max_{z ∈ W} z·n`.
    pub fn support(&self, n: P2) -> f64 {
        self.vertices.iter().map(|v| v[0] * n[0] + v[1] * n[1]).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Clip a convex counterclockwise polygon to `z·n ≤ c`.
fn clip(poly: &[P2], n: P2, c: f64) -> Vec<P2> {
    let val = |p: P2| p[0] * n[0] + p[1] * n[1] - c;
    let m = poly.len();
    let mut out = Vec::with_capacity(m + 1);
    for k in 0..m {
        let (p, q) = (poly[k], poly[(k + 1) % m]);
        let (vp, vq) = (val(p), val(q));
        if vp <= 0.0 {
            out.push(p);
        }
        if (vp < 0.0 && vq > 0.0) || (vp > 0.0 && vq < 0.0) {
            let t = vp / (vp - vq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

/// Intersection of the half-planes `z·n_k ≤ τ(n_k)` for `resolution`
/// equally spaced normals starting at `e₁` (multiples of 8 keep the
/// lattice symmetries).
pub fn wulff_shape(tq: &SurfaceTensionFn, resolution: usize) -> Result<WulffShape> {
    tq.validate()?;
    if resolution < 3 {
        return Err(Error::Domain(format!("{resolution} normals cannot bound a region")));
    }
    let big = 4.0 * tq.max_over_normals();
    let mut poly = vec![[-big, -big], [big, -big], [big, big], [-big, big]];
    for k in 0..resolution {
        let phi = TAU * k as f64 / resolution as f64;
        let n = [phi.cos(), phi.sin()];
        poly = clip(&poly, n, tq.eval(n));
    }
    // drop repeated vertices produced by redundant constraints
    let mut vertices: Vec<P2> = Vec::with_capacity(poly.len());
    for p in poly {
        if vertices.last().is_none_or(|q: &P2| (q[0] - p[0]).hypot(q[1] - p[1]) > 1e-13) {
            vertices.push(p);
        }
    }
    while vertices.len() > 1 {
        let (a, b) = (vertices[0], vertices[vertices.len() - 1]);
        if (a[0] - b[0]).hypot(a[1] - b[1]) > 1e-13 {
            break;
        }
        vertices.pop();
    }
    Ok(WulffShape { vertices })
}

/// `(F^q(P), 2 √(|W| |P|))` for the isoperimetric inequality
/// `F^q(P) ≥ d |W|^{1/d} |P|^{(d−1)/d}` in two dimensions.
pub fn isoperimetric_sides(p: &PhaseProfile, tq: &SurfaceTensionFn, wulff_area: f64) -> Result<(f64, f64)> {
    Ok((surface_energy_quenched(p, tq)?, 2.0 * (wulff_area * p.area()).sqrt()))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    #[test]
    fn l1_gives_the_unit_square() {
        for res in [4, 8, 64] {
            let w = wulff_shape(&SurfaceTensionFn::L1, res).unwrap();
            assert!((w.area() - 4.0).abs() < 1e-12, "{res}: {}", w.area());
            assert!(w.contains([1.0, 1.0]) && !w.contains([1.01, 0.0]));
        }
    }

    #[test]
    fn isotropic_gives_a_disk() {
        let res = 256;
        let w = wulff_shape(&SurfaceTensionFn::isotropic(1.0), res).unwrap();
        let bound = 1.0 / (PI / res as f64).cos() - 1.0;
        for v in &w.vertices {
            let r = v[0].hypot(v[1]);
            assert!(r >= 1.0 - 1e-12 && r <= 1.0 + bound + 1e-12);
        }
        assert!(w.contains([0.0, 0.0]));
        // symmetric under the lattice symmetries
        for v in &w.vertices {
            for img in [[v[1], v[0]], [-v[0], v[1]], [v[0], -v[1]]] {
                assert!(w.contains([img[0] * (1.0 - 1e-9), img[1] * (1.0 - 1e-9)]));
            }
        }
    }
}
