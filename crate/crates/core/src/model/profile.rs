use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::lattice::LatticeBox;
use super::spins::SpinConfig;
use crate::{Error, Result};

/// Block-averaged magnetization on `[0,1]^d`.
///
/// The box is rescaled by its side length `n`; block `i` covers local sites
/// `K i + {1..K}^d` and the point `x` reads block `floor(n x / K)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MagnetizationProfile {
    pub dim: usize,
    pub side: usize,
    pub block: usize,
    pub blocks_per_axis: usize,
    /// Row-major over block multi-indices, last axis fastest.
    pub values: Vec<f64>,
}

impl MagnetizationProfile {
    fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.blocks_per_axis + i)
    }

    pub fn block_value(&self, idx: &[usize]) -> f64 {
        self.values[self.flat(idx)]
    }

    /// `M_K(x)` for `x ∈ [0,1]^d`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim || x.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Domain("point outside [0,1]^d".into()));
        }
        let idx: Vec<usize> = x
            .iter()
            .map(|&v| {
                let i = (self.side as f64 * v / self.block as f64).floor() as usize;
                i.min(self.blocks_per_axis - 1)
            })
            .collect();
        Ok(self.block_value(&idx))
    }

    /// `∫_{[0,1]^d} M_K`.
    pub fn integrate(&self) -> f64 {
        let n = self.side as f64;
        let width = |i: usize| {
            let lo = (i * self.block) as f64 / n;
            let hi = (((i + 1) * self.block) as f64 / n).min(1.0);
            hi - lo
        };
        let b = self.blocks_per_axis;
        let mut total = 0.0;
        let mut idx = vec![0usize; self.dim];
        for flat in 0..self.values.len() {
            let mut r = flat;
            for k in (0..self.dim).rev() {
                idx[k] = r % b;
                r /= b;
            }
            total += self.values[flat] * idx.iter().map(|&i| width(i)).product::<f64>();
        }
        total
    }
}

fn cube_extent(lattice: &LatticeBox) -> Result<(Vec<i64>, usize)> {
    let d = lattice.dim();
    let mut lo = vec![i64::MAX; d];
    let mut hi = vec![i64::MIN; d];
    for p in lattice.sites() {
        for k in 0..d {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let side = (hi[0] - lo[0] + 1) as usize;
    let full = (0..d).all(|k| (hi[k] - lo[k] + 1) as usize == side)
        && side.checked_pow(d as u32) == Some(lattice.len());
    if !full {
        return Err(Error::Unsupported("magnetization profile needs a cubic box".into()));
    }
    Ok((lo, side))
}

/// Magnetization profile at mesoscopic scale `k`. Blocks cut by the box
/// boundary are averaged over the sites they actually contain.
pub fn profile_mk(sigma: &SpinConfig, k: usize) -> Result<MagnetizationProfile> {
    if k == 0 {
        return Err(Error::Domain("block size must be at least 1".into()));
    }
    let lattice = sigma.lattice();
    let (lo, side) = cube_extent(lattice)?;
    let d = lattice.dim();
    let b = side.div_ceil(k);
    let nblocks = b.checked_pow(d as u32).ok_or_else(|| Error::Capacity("too many blocks".into()))?;
    let mut sums = vec![0.0; nblocks];
    let mut counts = vec![0usize; nblocks];
    for (i, p) in lattice.sites().iter().enumerate() {
        let flat = (0..d).fold(0, |acc, j| acc * b + (p[j] - lo[j]) as usize / k);
        sums[flat] += sigma.spin(i) as f64;
        counts[flat] += 1;
    }
    let values = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
    Ok(MagnetizationProfile {
        dim: d,
        side,
        block: k,
        blocks_per_axis: b,
        values,
    })
}

/// Whether a nearest-neighbour connected circuit of `+` spins inside the
/// annulus `r_in ≤ |x|_∞ ≤ r_out` separates the origin from the outside of
/// the annulus.
///
/// Equivalently, no `*`-connected path of non-plus annulus sites joins the
/// inner region to `|x|_∞ = r_out + 1`; that dual search is what runs here.
pub fn plus_circuit_exists(sigma: &SpinConfig, r_in: usize, r_out: usize) -> Result<bool> {
    let lattice = sigma.lattice();
    if lattice.dim() != 2 {
        return Err(Error::Unsupported("plus circuits are only defined in d = 2".into()));
    }
    if r_in > r_out {
        return Err(Error::Domain(format!("inner radius {r_in} exceeds outer radius {r_out}")));
    }
    let (ri, ro) = (r_in as i64, r_out as i64);
    for x in -ro..=ro {
        for y in -ro..=ro {
            if lattice.site_index(&[x, y]).is_none() {
                return Err(Error::Domain(format!("annulus radius {r_out} leaves the box")));
            }
        }
    }
    let width = (2 * ro + 3) as usize;
    let at = |x: i64, y: i64| ((x + ro + 1) as usize) * width + (y + ro + 1) as usize;
    let mut seen = vec![false; width * width];
    let mut queue = VecDeque::new();
    // The inner region (and the origin itself) is always on the origin side.
    for x in -ro..=ro {
        for y in -ro..=ro {
            if x.abs().max(y.abs()) < ri || (x == 0 && y == 0) {
                seen[at(x, y)] = true;
                queue.push_back((x, y));
            }
        }
    }
    while let Some((x, y)) = queue.pop_front() {
        for dx in -1..=1i64 {
            for dy in -1..=1i64 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let (u, v) = (x + dx, y + dy);
                if u.abs().max(v.abs()) > ro {
                    return Ok(false);
                }
                if seen[at(u, v)] {
                    continue;
                }
                let i = lattice.site_index(&[u, v]).expect("annulus checked");
                if sigma.spin(i) == 1 {
                    continue;
                }
                seen[at(u, v)] = true;
                queue.push_back((u, v));
            }
        }
    }
    Ok(true)
}
