use rand::Rng;
use rayon::prelude::*;

use super::graph::{ClusterCounter, EdgeGraph, Wiring};
use crate::model::CouplingField;
use crate::seeding;
use crate::{Error, Result};

/// Largest edge set enumerated by [`fk_exact`].
pub const FK_EXACT_CAP: usize = 22;
/// Largest edge set accepted by [`check_holley`].
pub const HOLLEY_CAP: usize = 12;

/// Parameters of the random-cluster measure: `q` and per-edge
/// probabilities `p_e = 1 - exp(-β J_e)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FkParams {
    pub q: f64,
    pub p: Vec<f64>,
}

impl FkParams {
    pub fn new(q: f64, p: Vec<f64>) -> Result<Self> {
        if !(q >= 1.0 && q.is_finite()) {
            return Err(Error::Domain(format!("q = {q} must be >= 1")));
        }
        if p.iter().any(|x| !(0.0..1.0).contains(x)) {
            return Err(Error::Domain("edge probabilities must lie in [0,1)".into()));
        }
        Ok(FkParams { q, p })
    }

    pub fn from_field(field: &CouplingField, beta: f64, q: f64) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::Domain(format!("inverse temperature {beta} must be finite and >= 0")));
        }
        Self::new(q, field.values().iter().map(|&j| edge_probability(beta, j)).collect())
    }
}

/// `p = 1 - exp(-β J)`.
pub fn edge_probability(beta: f64, j: f64) -> f64 {
    -(-beta * j).exp_m1()
}

/// Exact random-cluster law over `{0,1}^E`; state `s` opens edge `e` iff
/// bit `e` of `s` is set.
#[derive(Clone, Debug)]
pub struct FkTable {
    pub num_edges: usize,
    pub probs: Vec<f64>,
}

impl FkTable {
    pub fn edge_marginal(&self, e: usize) -> f64 {
        self.probs.iter().enumerate().filter(|(s, _)| s >> e & 1 == 1).map(|(_, p)| p).sum()
    }

    /// `Φ(A)` for an event given as a predicate on states.
    pub fn prob_of<F: Fn(u64) -> bool>(&self, event: F) -> f64 {
        self.probs.iter().enumerate().filter(|(s, _)| event(*s as u64)).map(|(_, p)| p).sum()
    }
}

fn check_sizes(graph: &EdgeGraph, params: &FkParams) -> Result<()> {
    if params.p.len() != graph.num_edges() {
        return Err(Error::Domain(format!(
            "{} edge probabilities for {} edges",
            params.p.len(),
            graph.num_edges()
        )));
    }
    Ok(())
}

/// Weights `Π p_e^{ω_e} (1-p_e)^{1-ω_e} q^{C(ω)}`, normalized.
pub fn fk_exact(graph: &EdgeGraph, params: &FkParams, wiring: &Wiring) -> Result<FkTable> {
    check_sizes(graph, params)?;
    let m = graph.num_edges();
    if m > FK_EXACT_CAP {
        return Err(Error::Capacity(format!("{m} edges exceed the enumeration cap of {FK_EXACT_CAP}")));
    }
    ClusterCounter::new(graph, wiring)?;
    let lq = params.q.ln();
    let lp: Vec<f64> = params.p.iter().map(|p| p.ln()).collect();
    let l1p: Vec<f64> = params.p.iter().map(|p| (-p).ln_1p()).collect();
    let states = 1usize << m;
    let chunk = 1usize << 12;
    let log_w: Vec<f64> = (0..states.div_ceil(chunk))
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut counter = ClusterCounter::new(graph, wiring).expect("checked");
            let lo = c * chunk;
            let hi = ((c + 1) * chunk).min(states);
            (lo..hi)
                .map(|s| {
                    let mut w = counter.count_bits(s as u64) as f64 * lq;
                    for e in 0..m {
                        w += if s >> e & 1 == 1 { lp[e] } else { l1p[e] };
                    }
                    w
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(FkTable { num_edges: m, probs: normalize_log(&log_w) })
}

pub(crate) fn normalize_log(log_w: &[f64]) -> Vec<f64> {
    let top = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = log_w.iter().map(|l| (l - top).exp()).collect();
    let z: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= z);
    p
}

/// Single-edge heat-bath chain for the random-cluster measure.
///
/// The conditional law of `ω_e` given the rest only depends on whether
/// the endpoints of `e` are already joined: if they are, opening `e` does
/// not change the cluster count and `P(open) = p_e`; otherwise opening
/// merges two clusters and `P(open) = p_e / (p_e + q(1 - p_e))`.
pub struct FkEdgeChain<'g> {
    graph: &'g EdgeGraph,
    params: FkParams,
    counter: ClusterCounter<'g>,
    omega: Vec<bool>,
    rng: seeding::Stream,
}

impl<'g> FkEdgeChain<'g> {
    pub fn new(graph: &'g EdgeGraph, params: FkParams, wiring: &Wiring, initial: Vec<bool>, seed: u64) -> Result<Self> {
        check_sizes(graph, &params)?;
        if initial.len() != graph.num_edges() {
            return Err(Error::Domain("initial configuration has the wrong length".into()));
        }
        let counter = ClusterCounter::new(graph, wiring)?;
        Ok(FkEdgeChain { graph, params, counter, omega: initial, rng: seeding::stream(seed, "fk-edge-chain", 0) })
    }

    pub fn state(&self) -> &[bool] {
        &self.omega
    }

    pub fn state_bits(&self) -> u64 {
        self.omega.iter().enumerate().filter(|(_, &b)| b).fold(0, |acc, (e, _)| acc | 1 << e)
    }

    /// Probability that `e` is open given the rest of the configuration.
    pub fn open_probability(&mut self, e: usize) -> f64 {
        let p = self.params.p[e];
        if self.params.q == 1.0 || self.counter.endpoints_connected_without(&self.omega, e) {
            p
        } else {
            p / (p + self.params.q * (1.0 - p))
        }
    }

    /// Resample edge `e`.
    pub fn update(&mut self, e: usize) {
        let pr = self.open_probability(e);
        self.omega[e] = self.rng.gen::<f64>() < pr;
    }

    /// One random-scan step.
    pub fn step(&mut self) {
        let m = self.graph.num_edges();
        if m == 0 {
            return;
        }
        let e = self.rng.gen_range(0..m);
        self.update(e);
    }

    /// `|E|` random-scan steps.
    pub fn sweep(&mut self) {
        for _ in 0..self.graph.num_edges() {
            self.step();
        }
    }
}

/// Holley's lattice condition `μ₂(ω∨ω')μ₁(ω∧ω') ≥ μ₁(ω)μ₂(ω')` for all pairs,
/// after normalizing both tables; it implies that `μ₂` dominates `μ₁`.
pub fn check_holley(mu1: &[f64], mu2: &[f64]) -> Result<bool> {
    if mu1.len() != mu2.len() || !mu1.len().is_power_of_two() {
        return Err(Error::Domain("tables must share a power-of-two state space".into()));
    }
    let m = mu1.len().trailing_zeros() as usize;
    if m > HOLLEY_CAP {
        return Err(Error::Capacity(format!("{m} edges exceed the Holley cap of {HOLLEY_CAP}")));
    }
    let norm = |t: &[f64]| {
        let z: f64 = t.iter().sum();
        t.iter().map(|x| x / z).collect::<Vec<_>>()
    };
    let (a, b) = (norm(mu1), norm(mu2));
    let n = a.len();
    Ok((0..n).into_par_iter().all(|w| {
        (0..n).all(|v| b[w | v] * a[w & v] >= a[w] * b[v] - 1e-12)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LatticeBox;

    fn path(k: i64) -> EdgeGraph {
        let pairs: Vec<_> = (0..k).map(|x| (vec![x, 0], vec![x + 1, 0])).collect();
        EdgeGraph::from_point_edges(2, &pairs).unwrap()
    }

    #[test]
    fn single_edge_closed_forms() {
        let g = EdgeGraph::from_point_edges(2, &[(vec![0, 0], vec![1, 0])]).unwrap();
        let p = 0.37;
        let par = FkParams::new(2.0, vec![p]).unwrap();
        let free = fk_exact(&g, &par, &Wiring::Free).unwrap();
        assert!((free.probs[1] - p / (p + 2.0 * (1.0 - p))).abs() < 1e-15);
        let wired = fk_exact(&g, &par, &Wiring::Wired).unwrap();
        assert!((wired.probs[1] - p).abs() < 1e-15);
    }

    #[test]
    fn q_one_is_percolation() {
        let l = LatticeBox::from_ranges(&[(0, 1), (0, 1)]).unwrap();
        let g = EdgeGraph::interior(&l).unwrap();
        let p = vec![0.1, 0.5, 0.7, 0.3];
        let t = fk_exact(&g, &FkParams::new(1.0, p.clone()).unwrap(), &Wiring::Free).unwrap();
        for s in 0..16usize {
            let want: f64 = (0..4).map(|e| if s >> e & 1 == 1 { p[e] } else { 1.0 - p[e] }).product();
            assert!((t.probs[s] - want).abs() < 1e-15);
        }
        assert!(fk_exact(&EdgeGraph::closed(&LatticeBox::symmetric(2, 2).unwrap()),
            &FkParams::new(2.0, vec![0.5; 60]).unwrap(), &Wiring::Wired).is_err());
    }

    #[test]
    fn chain_detailed_balance() {
        // transition probabilities of the single-edge update, state by state
        let g = path(3);
        for wiring in [Wiring::Free, Wiring::Wired] {
            let par = FkParams::new(2.0, vec![0.3, 0.6, 0.45]).unwrap();
            let t = fk_exact(&g, &par, &wiring).unwrap();
            for s in 0..8u64 {
                for e in 0..3 {
                    let bits: Vec<bool> = (0..3).map(|k| s >> k & 1 == 1).collect();
                    let mut ch = FkEdgeChain::new(&g, par.clone(), &wiring, bits, 0).unwrap();
                    let po = ch.open_probability(e);
                    let (open, closed) = (s | 1 << e, s & !(1 << e));
                    // π(closed) P(open) = π(open) P(close)
                    let lhs = t.probs[closed as usize] * po;
                    let rhs = t.probs[open as usize] * (1.0 - po);
                    assert!((lhs - rhs).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn holley_cases() {
        let prod = |p: f64| vec![(1.0 - p) * (1.0 - p), p * (1.0 - p), p * (1.0 - p), p * p];
        assert!(check_holley(&prod(0.3), &prod(0.3)).unwrap());
        assert!(check_holley(&prod(0.3), &prod(0.6)).unwrap());
        assert!(!check_holley(&prod(0.6), &prod(0.3)).unwrap());
        // same one-edge marginals ordering is not enough: mass on {01,10}
        assert!(!check_holley(&[0.25, 0.25, 0.25, 0.25], &[0.0, 0.5, 0.5, 0.0]).unwrap());
    }
}
