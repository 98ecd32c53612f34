use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{edge_probability, ClusterCounter, EdgeGraph, FkEdgeChain, FkParams, UnionFind, Wiring};
use crate::model::{CouplingField, LatticeBox, Point};
use crate::seeding;
use crate::stats::clopper_pearson;
use crate::{Error, Result};

/// Largest rectangle edge set handled by exact enumeration.
pub const RECT_EXACT_CAP: usize = 22;

/// Axis-aligned rectangle `x + L S + [-H, H] n` with `n = ±e_axis` and `S`
/// the unit cube of the orthogonal hyperplane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RectSpec {
    pub center: Vec<f64>,
    /// Basis side `L`.
    pub side: f64,
    /// Half-height `H` along the normal.
    pub half_height: f64,
    /// Index of the coordinate axis carrying the normal.
    pub axis: usize,
    /// `+1` or `-1`: orientation of the normal.
    #[serde(default = "plus_one")]
    pub sign: i8,
}

fn plus_one() -> i8 {
    1
}

impl RectSpec {
    pub fn new(center: Vec<f64>, side: f64, half_height: f64, axis: usize) -> Self {
        RectSpec { center, side, half_height, axis, sign: 1 }
    }

    /// `R_{0, N, δN}` with normal `e_axis`.
    pub fn centered(dim: usize, n: f64, delta: f64, axis: usize) -> Self {
        Self::new(vec![0.0; dim], n, delta * n, axis)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn normal(&self) -> Vec<f64> {
        let mut n = vec![0.0; self.dim()];
        n[self.axis] = self.sign as f64;
        n
    }

    fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d < 1 || self.axis >= d {
            return Err(Error::Domain("normal axis outside the dimension".into()));
        }
        if !(self.side > 0.0 && self.half_height > 0.0 && self.side.is_finite() && self.half_height.is_finite()) {
            return Err(Error::Domain("side and half-height must be positive".into()));
        }
        if self.sign != 1 && self.sign != -1 {
            return Err(Error::Domain("normal sign must be +1 or -1".into()));
        }
        if self.center.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("non-finite center".into()));
        }
        Ok(())
    }

    /// Integer range strictly inside `(c - h, c + h)`.
    fn open_range(c: f64, h: f64) -> (i64, i64) {
        let lo = (c - h).floor() as i64 + 1;
        let hi = (c + h).ceil() as i64 - 1;
        (lo, hi)
    }

    /// Per-axis integer ranges of `R̂`.
    pub fn ranges(&self) -> Vec<(i64, i64)> {
        (0..self.dim())
            .map(|k| {
                let h = if k == self.axis { self.half_height } else { self.side / 2.0 };
                Self::open_range(self.center[k], h)
            })
            .collect()
    }
}

/// A discretized rectangle with its interior edge graph and the split of
/// its inner boundary.
#[derive(Clone, Debug)]
pub struct Rectangle {
    pub spec: RectSpec,
    pub lattice: Arc<LatticeBox>,
    pub graph: EdgeGraph,
    /// Vertices (of `graph`) in `∂⁺R̂` and `∂⁻R̂`.
    pub upper: Vec<usize>,
    pub lower: Vec<usize>,
}

impl Rectangle {
    pub fn new(spec: RectSpec) -> Result<Self> {
        spec.validate()?;
        let ranges = spec.ranges();
        if ranges.iter().any(|(lo, hi)| lo > hi) {
            return Err(Error::Domain("rectangle contains no lattice point".into()));
        }
        let lattice = Arc::new(LatticeBox::from_ranges(&ranges)?);
        let pairs: Vec<(Point, Point)> = lattice
            .interior_edges()
            .map(|e| {
                let (p, q) = lattice.edge_points(e);
                (p.clone(), q.clone())
            })
            .collect();
        let graph = if pairs.is_empty() {
            EdgeGraph::from_point_edges(spec.dim(), &[])?
        } else {
            EdgeGraph::from_point_edges(spec.dim(), &pairs)?
        };
        let n = spec.normal();
        let mut upper = Vec::new();
        let mut lower = Vec::new();
        for (v, p) in graph.points().iter().enumerate() {
            // every vertex of R̂ with a neighbour outside is a boundary vertex
            if !graph.is_boundary(v) {
                continue;
            }
            let s: f64 = p.iter().zip(&spec.center).zip(&n).map(|((y, x), nk)| (*y as f64 - x) * nk).sum();
            if s >= 0.0 {
                upper.push(v);
            } else {
                lower.push(v);
            }
        }
        Ok(Rectangle { spec, lattice, graph, upper, lower })
    }

    pub fn num_edges(&self) -> usize {
        self.graph.num_edges()
    }

    /// `L^{d-1}`.
    pub fn section(&self) -> f64 {
        self.spec.side.powi(self.spec.dim() as i32 - 1)
    }

    /// Sites of `R̂` (graph vertices).
    pub fn sites(&self) -> &[Point] {
        self.graph.points()
    }

    /// Couplings of the rectangle's edges read from a field defined on a
    /// larger box.
    pub fn couplings(&self, field: &CouplingField) -> Result<Vec<f64>> {
        let fl = field.lattice();
        self.graph
            .edges()
            .iter()
            .map(|&(a, b)| {
                let (p, q) = (&self.graph.points()[a], &self.graph.points()[b]);
                fl.edge_between(p, q)
                    .map(|e| field.get(e))
                    .ok_or_else(|| Error::Domain(format!("edge {p:?}-{q:?} is not covered by the field")))
            })
            .collect()
    }

    /// Edges of the rectangle crossing the hyperplane between layers
    /// `level` and `level + 1` of the normal axis: a full cross-section.
    pub fn cross_section(&self, level: i64) -> Vec<(Point, Point)> {
        let k = self.spec.axis;
        self.graph
            .edges()
            .iter()
            .map(|&(a, b)| (self.graph.points()[a].clone(), self.graph.points()[b].clone()))
            .filter(|(p, q)| p[k].min(q[k]) == level && p[k] != q[k])
            .collect()
    }

    /// Whether `∂⁺` and `∂⁻` are joined by open edges of `ω` (no wiring).
    pub fn connects(&self, omega: impl Fn(usize) -> bool, uf: &mut UnionFind) -> bool {
        uf.reset();
        for (e, &(a, b)) in self.graph.edges().iter().enumerate() {
            if omega(e) {
                uf.union(a, b);
            }
        }
        let mut roots: Vec<usize> = self.upper.iter().map(|&v| uf.find(v)).collect();
        roots.sort_unstable();
        self.lower.iter().any(|&v| roots.binary_search(&uf.find(v)).is_ok())
    }
}

/// Per-configuration data of a rectangle that does not depend on the
/// couplings: the wired cluster count and the disconnection indicator.
/// Built once, it makes coupling sweeps cost one pass over `2^|E|` states.
#[derive(Clone, Debug)]
pub struct DisconnectionCache {
    pub num_edges: usize,
    clusters: Vec<u8>,
    disconnected: Vec<bool>,
}

impl DisconnectionCache {
    pub fn new(rect: &Rectangle) -> Result<Self> {
        let m = rect.num_edges();
        if m > RECT_EXACT_CAP {
            return Err(Error::Capacity(format!("{m} edges exceed the exact cap of {RECT_EXACT_CAP}")));
        }
        let states = 1usize << m;
        let chunk = 1usize << 12;
        let data: Vec<(u8, bool)> = (0..states.div_ceil(chunk))
            .into_par_iter()
            .flat_map_iter(|c| {
                let mut counter = ClusterCounter::new(&rect.graph, &Wiring::Wired).expect("wired is valid");
                let mut uf = UnionFind::new(rect.graph.num_vertices());
                let (lo, hi) = (c * chunk, ((c + 1) * chunk).min(states));
                (lo..hi)
                    .map(|s| {
                        let k = counter.count_bits(s as u64) as u8;
                        (k, !rect.connects(|e| s >> e & 1 == 1, &mut uf))
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        let (clusters, disconnected) = data.into_iter().unzip();
        Ok(DisconnectionCache { num_edges: m, clusters, disconnected })
    }

    /// `Φ^{J,w}_R(D_R)` for edge probabilities `p`.
    pub fn probability(&self, p: &[f64], q: f64) -> f64 {
        let m = self.num_edges;
        let lq = q.ln();
        let lp: Vec<f64> = p.iter().map(|x| x.ln()).collect();
        let l1p: Vec<f64> = p.iter().map(|x| (-x).ln_1p()).collect();
        let base: f64 = l1p.iter().sum();
        let (mut top_all, mut top_d) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        let lw: Vec<f64> = (0..self.clusters.len())
            .map(|s| {
                let mut w = base + self.clusters[s] as f64 * lq;
                for e in 0..m {
                    if s >> e & 1 == 1 {
                        w += lp[e] - l1p[e];
                    }
                }
                top_all = top_all.max(w);
                if self.disconnected[s] {
                    top_d = top_d.max(w);
                }
                w
            })
            .collect();
        if top_d == f64::NEG_INFINITY {
            return 0.0;
        }
        let (mut z, mut zd) = (0.0, 0.0);
        for (s, w) in lw.iter().enumerate() {
            let x = (w - top_all).exp();
            z += x;
            if self.disconnected[s] {
                zd += x;
            }
        }
        (zd / z).min(1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    Exact,
    MonteCarlo,
    /// Exact when the rectangle is small enough, otherwise Monte Carlo.
    Auto,
}

/// Monte Carlo budget: independent chains, each run for `sweeps` sweeps of
/// single-edge updates and sampled once at the end.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McBudget {
    pub replicas: usize,
    pub sweeps: usize,
    pub seed: u64,
}

impl Default for McBudget {
    fn default() -> Self {
        McBudget { replicas: 2000, sweeps: 200, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisconnectionEstimate {
    pub prob: f64,
    pub stderr: f64,
    /// 95% interval (exact value twice in exact mode).
    pub lo: f64,
    pub hi: f64,
    pub hits: usize,
    pub samples: usize,
    pub exact: bool,
}

/// `Φ^{J,w}_R(D_R)` for couplings `j` on the rectangle's edges.
pub fn disconnection_prob(
    rect: &Rectangle,
    j: &[f64],
    beta: f64,
    mode: EvalMode,
    budget: &McBudget,
) -> Result<DisconnectionEstimate> {
    if j.len() != rect.num_edges() {
        return Err(Error::Domain("one coupling per rectangle edge is required".into()));
    }
    let p: Vec<f64> = j.iter().map(|&x| edge_probability(beta, x)).collect();
    let exact = match mode {
        EvalMode::Exact => true,
        EvalMode::MonteCarlo => false,
        EvalMode::Auto => rect.num_edges() <= RECT_EXACT_CAP,
    };
    if exact {
        let cache = DisconnectionCache::new(rect)?;
        Ok(exact_estimate(cache.probability(&p, 2.0)))
    } else {
        mc_disconnection(rect, &p, budget)
    }
}

pub(crate) fn exact_estimate(prob: f64) -> DisconnectionEstimate {
    DisconnectionEstimate { prob, stderr: 0.0, lo: prob, hi: prob, hits: 0, samples: 0, exact: true }
}

pub(crate) fn mc_disconnection(rect: &Rectangle, p: &[f64], budget: &McBudget) -> Result<DisconnectionEstimate> {
    if budget.replicas == 0 {
        return Err(Error::Statistical("Monte Carlo budget has no replicas".into()));
    }
    // J ≡ 0 on a cut is decided without sampling
    let params = FkParams::new(2.0, p.to_vec())?;
    let hits: usize = (0..budget.replicas as u64)
        .into_par_iter()
        .map(|r| -> Result<usize> {
            let mut rng = seeding::stream(budget.seed, "fk-start", r);
            let init: Vec<bool> = p.iter().map(|&pe| rng.gen::<f64>() < pe).collect();
            let seed = seeding::derive_seed(budget.seed, "fk-replica", r);
            let mut chain = FkEdgeChain::new(&rect.graph, params.clone(), &Wiring::Wired, init, seed)?;
            for _ in 0..budget.sweeps {
                chain.sweep();
            }
            let mut uf = UnionFind::new(rect.graph.num_vertices());
            let st = chain.state();
            Ok(usize::from(!rect.connects(|e| st[e], &mut uf)))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    let n = budget.replicas;
    let prob = hits as f64 / n as f64;
    let (lo, hi) = clopper_pearson(hits as u64, n as u64, 0.05)?;
    Ok(DisconnectionEstimate {
        prob,
        stderr: (prob * (1.0 - prob) / n as f64).sqrt(),
        lo,
        hi,
        hits,
        samples: n,
        exact: false,
    })
}

/// `τ^J_R = -L^{-(d-1)} log Φ(D_R)` with its interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensionEstimate {
    /// Point estimate; with zero Monte Carlo hits this is the lower bound.
    pub tau: f64,
    pub tau_lo: f64,
    pub tau_hi: f64,
    /// No disconnection was observed: only `tau_lo` is meaningful.
    pub lower_bound_only: bool,
    pub disconnection: DisconnectionEstimate,
}

pub fn tension_from(rect: &Rectangle, est: DisconnectionEstimate) -> TensionEstimate {
    let s = rect.section();
    let tau_of = |phi: f64| if phi >= 1.0 { 0.0 } else { -phi.ln() / s };
    if est.exact {
        let t = tau_of(est.prob);
        return TensionEstimate { tau: t, tau_lo: t, tau_hi: t, lower_bound_only: false, disconnection: est };
    }
    let tau_lo = tau_of(est.hi);
    let tau_hi = if est.lo > 0.0 { tau_of(est.lo) } else { f64::INFINITY };
    if est.hits == 0 {
        TensionEstimate { tau: tau_lo, tau_lo, tau_hi, lower_bound_only: true, disconnection: est }
    } else {
        TensionEstimate { tau: tau_of(est.prob), tau_lo, tau_hi, lower_bound_only: false, disconnection: est }
    }
}

pub fn surface_tension_tau(
    rect: &Rectangle,
    j: &[f64],
    beta: f64,
    mode: EvalMode,
    budget: &McBudget,
) -> Result<TensionEstimate> {
    Ok(tension_from(rect, disconnection_prob(rect, j, beta, mode, budget)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discretization() {
        let r = Rectangle::new(RectSpec::new(vec![0.0, 0.0], 4.0, 2.0, 1)).unwrap();
        assert_eq!(r.spec.ranges(), vec![(-1, 1), (-1, 1)]);
        assert_eq!(r.sites().len(), 9);
        assert_eq!(r.num_edges(), 12);
        // centre is the only interior site; y >= 0 goes up
        assert_eq!(r.upper.len() + r.lower.len(), 8);
        assert_eq!(r.lower.len(), 3);
        let r = Rectangle::new(RectSpec::new(vec![0.5, 1.0], 2.0, 1.5, 1)).unwrap();
        assert_eq!(r.spec.ranges(), vec![(0, 1), (0, 2)]);
        assert_eq!(r.num_edges(), 7);
    }

    #[test]
    fn trivial_probabilities() {
        let r = Rectangle::new(RectSpec::new(vec![0.5, 1.0], 2.0, 1.5, 1)).unwrap();
        let b = McBudget::default();
        assert_eq!(disconnection_prob(&r, &[0.0; 7], 1.0, EvalMode::Exact, &b).unwrap().prob, 1.0);
        assert_eq!(disconnection_prob(&r, &[1.0; 7], 0.0, EvalMode::Exact, &b).unwrap().prob, 1.0);
        let t = surface_tension_tau(&r, &[0.0; 7], 1.0, EvalMode::Exact, &b).unwrap();
        assert_eq!(t.tau, 0.0);
        let t = surface_tension_tau(&r, &[1.0; 7], 1.0, EvalMode::Exact, &b).unwrap();
        assert!(t.tau > 0.0);
    }

    #[test]
    fn cross_section_forces_disconnection() {
        let r = Rectangle::new(RectSpec::new(vec![0.0, 0.0], 4.0, 2.0, 1)).unwrap();
        let cut = r.cross_section(-1);
        assert_eq!(cut.len(), 3);
        let mut j = vec![1.0; r.num_edges()];
        for (p, q) in &cut {
            let e = r.graph.edges().iter().position(|&(a, b)| {
                let (x, y) = (&r.graph.points()[a], &r.graph.points()[b]);
                (x == p && y == q) || (x == q && y == p)
            }).unwrap();
            j[e] = 0.0;
        }
        let d = disconnection_prob(&r, &j, 2.0, EvalMode::Exact, &McBudget::default()).unwrap();
        assert!((d.prob - 1.0).abs() < 1e-12);
    }
}
