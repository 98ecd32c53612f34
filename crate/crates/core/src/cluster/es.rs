use rand::Rng;

use super::fk::{edge_probability, normalize_log};
use super::graph::{ClusterCounter, EdgeGraph, Wiring};
use crate::model::{Boundary, CouplingField, SpinConfig, Vertex};
use crate::{Error, Result};

/// Largest `|Λ| + |E^w|` enumerated by [`es_joint_exact`].
pub const ES_EXACT_CAP: usize = 24;

/// The Edwards–Sokal joint law of spins and edges on `E^w(Λ)` with plus
/// exterior. Index `(σ, ω)` as `sigma_bits * 2^{|E^w|} + omega_bits`.
#[derive(Clone, Debug)]
pub struct EsTable {
    pub sites: usize,
    pub edges: usize,
    pub probs: Vec<f64>,
}

impl EsTable {
    pub fn prob(&self, sigma: u64, omega: u64) -> f64 {
        self.probs[((sigma as usize) << self.edges) | omega as usize]
    }

    pub fn sigma_marginal(&self) -> Vec<f64> {
        let m = 1usize << self.edges;
        self.probs.chunks(m).map(|c| c.iter().sum()).collect()
    }

    pub fn omega_marginal(&self) -> Vec<f64> {
        let m = 1usize << self.edges;
        let mut out = vec![0.0; m];
        for (i, p) in self.probs.iter().enumerate() {
            out[i & (m - 1)] += p;
        }
        out
    }
}

fn spin_at(sigma: u64, v: Vertex) -> i8 {
    match v {
        Vertex::Site(i) => if sigma >> i & 1 == 1 { 1 } else { -1 },
        Vertex::Exterior(_) => 1,
    }
}

/// Joint weights `Π_e [p_e 1{ω_e=1, σ agrees on e} + (1-p_e) 1{ω_e=0}]`.
pub fn es_joint_exact(field: &CouplingField, beta: f64) -> Result<EsTable> {
    let lattice = field.lattice();
    let n = lattice.len();
    let m = lattice.edges().len();
    if n + m > ES_EXACT_CAP {
        return Err(Error::Capacity(format!("{n} sites and {m} edges exceed the joint enumeration cap")));
    }
    let p: Vec<f64> = field.values().iter().map(|&j| edge_probability(beta, j)).collect();
    let mut log_w = Vec::with_capacity(1 << (n + m));
    for s in 0..(1u64 << n) {
        let agree: Vec<bool> = lattice.edges().iter().map(|e| spin_at(s, e.a) == spin_at(s, e.b)).collect();
        for w in 0..(1u64 << m) {
            let mut lw = 0.0;
            for e in 0..m {
                lw += if w >> e & 1 == 1 {
                    if agree[e] { p[e].ln() } else { f64::NEG_INFINITY }
                } else {
                    (-p[e]).ln_1p()
                };
            }
            log_w.push(lw);
        }
    }
    Ok(EsTable { sites: n, edges: m, probs: normalize_log(&log_w) })
}

/// Spins given edges: clusters joined to the exterior take `+`, every other
/// cluster an independent fair sign. `graph` must be [`EdgeGraph::closed`]
/// of the configuration's box.
pub fn es_sample_sigma_given_omega(
    field: &CouplingField,
    omega: &[bool],
    wiring: &Wiring,
    rng: &mut impl Rng,
) -> Result<SpinConfig> {
    let lattice = field.lattice();
    let graph = EdgeGraph::closed(lattice);
    if omega.len() != graph.num_edges() {
        return Err(Error::Domain("configuration length differs from the edge count".into()));
    }
    if matches!(wiring, Wiring::Partition(_)) {
        return Err(Error::Unsupported("spin sampling takes free or wired boundary conditions".into()));
    }
    let mut counter = ClusterCounter::new(&graph, wiring)?;
    let (roots, wired) = counter.components(omega);
    let n = lattice.len();
    let mut sign = vec![0i8; graph.num_vertices()];
    let mut spins = Vec::with_capacity(n);
    for x in 0..n {
        let r = roots[x];
        if sign[r] == 0 {
            sign[r] = if wired[x] || rng.gen::<bool>() { 1 } else { -1 };
        }
        spins.push(sign[r]);
    }
    SpinConfig::new(lattice.clone(), spins, Boundary::Plus)
}

/// Edges given spins: independently open with probability `p_e` on edges
/// whose endpoints agree, closed otherwise.
pub fn es_sample_omega_given_sigma(
    field: &CouplingField,
    sigma: &SpinConfig,
    beta: f64,
    rng: &mut impl Rng,
) -> Result<Vec<bool>> {
    if !field.same_lattice(sigma.lattice()) {
        return Err(Error::Domain("field and configuration live on different boxes".into()));
    }
    Ok(sigma
        .lattice()
        .edges()
        .iter()
        .enumerate()
        .map(|(e, edge)| {
            let u: f64 = rng.gen();
            sigma.spin_at(edge.a) == sigma.spin_at(edge.b) && u < edge_probability(beta, field.get(e))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::{fk_exact, FkParams};
    use crate::model::{GibbsTable, LatticeBox};
    use std::sync::Arc;

    #[test]
    fn marginals_on_small_boxes() {
        for (ranges, seed) in [(vec![(0, 0), (0, 0)], 1u64), (vec![(0, 1), (0, 0)], 2)] {
            let l = Arc::new(LatticeBox::from_ranges(&ranges).unwrap());
            let f = CouplingField::sample(l.clone(), &crate::model::DisorderSpec::bernoulli(0.3, seed)).unwrap();
            let beta = 0.9;
            let t = es_joint_exact(&f, beta).unwrap();
            let g = GibbsTable::new(&f, beta, Boundary::Plus).unwrap();
            for (a, b) in t.sigma_marginal().iter().zip(g.probs()) {
                assert!((a - b).abs() < 1e-12);
            }
            let fk = fk_exact(&EdgeGraph::closed(&l), &FkParams::from_field(&f, beta, 2.0).unwrap(), &Wiring::Wired).unwrap();
            for (a, b) in t.omega_marginal().iter().zip(&fk.probs) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn compatibility_and_infinite_temperature() {
        let l = Arc::new(LatticeBox::symmetric(2, 0).unwrap());
        let f = CouplingField::uniform(l, 1.0).unwrap();
        let t = es_joint_exact(&f, 0.7).unwrap();
        // σ_0 = -1 disagrees with the plus exterior on every edge
        for w in 1..16 {
            assert_eq!(t.prob(0, w), 0.0);
        }
        let t0 = es_joint_exact(&f, 0.0).unwrap();
        assert!((t0.prob(0, 0) - 0.5).abs() < 1e-15 && (t0.prob(1, 0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn conditional_samplers() {
        let l = Arc::new(LatticeBox::from_ranges(&[(0, 2), (0, 2)]).unwrap());
        let f = CouplingField::uniform(l.clone(), 1.0).unwrap();
        let mut rng = crate::seeding::stream(1, "t", 0);
        let all = vec![true; l.edges().len()];
        let s = es_sample_sigma_given_omega(&f, &all, &Wiring::Wired, &mut rng).unwrap();
        assert!(s.spins().iter().all(|&x| x == 1));
        let mut s = SpinConfig::constant(l.clone(), 1, Boundary::Plus).unwrap();
        s.set(4, -1);
        for _ in 0..50 {
            let w = es_sample_omega_given_sigma(&f, &s, 5.0, &mut rng).unwrap();
            for &(_, e) in l.neighbours(4) {
                assert!(!w[e]);
            }
        }
    }
}
