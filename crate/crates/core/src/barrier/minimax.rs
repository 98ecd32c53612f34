use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::energy::{surface_energy_reduced, ReducedTension};
use super::profile::{GridProfile, PhaseProfile};
use super::tension_fn::SurfaceTensionFn;
use crate::{Error, Result};

/// Largest number of free cells searched (`2^20` profiles).
pub const MINIMAX_CAP: usize = 20;

/// State space of a grid barrier search: every profile agreeing with the
/// plus margin, encoded by the minus bits of the free cells.
#[derive(Clone, Debug)]
pub struct ProfileGraph {
    template: GridProfile,
    free: Vec<usize>,
    energy: Vec<f64>,
    start: usize,
    k: usize,
    masks: Vec<u32>,
}

impl ProfileGraph {
    pub fn new(u0: &GridProfile, tr: &ReducedTension, tq: &SurfaceTensionFn, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("jumps must flip at least one cell".into()));
        }
        let free = u0.free_cells();
        if free.len() > MINIMAX_CAP {
            return Err(Error::Capacity(format!("{} free cells exceed the cap of {MINIMAX_CAP}", free.len())));
        }
        let template = GridProfile::plus(u0.n(), u0.margin())?;
        let u0p = PhaseProfile::Grid(u0.clone());
        let states = 1usize << free.len();
        let energy = (0..states)
            .into_par_iter()
            .map(|s| {
                let p = PhaseProfile::Grid(decode(&template, &free, s));
                surface_energy_reduced(&p, &u0p, tr, tq)
            })
            .collect::<Result<Vec<f64>>>()?;
        let start = free.iter().enumerate().filter(|(_, &c)| u0.cells()[c]).fold(0usize, |a, (b, _)| a | 1 << b);
        let kk = k.min(free.len());
        let masks = if kk < free.len() {
            (1u32..(1u32 << free.len())).filter(|m| m.count_ones() as usize <= kk).collect()
        } else {
            Vec::new()
        };
        Ok(ProfileGraph { template, free, energy, start, k: kk, masks })
    }

    pub fn states(&self) -> usize {
        self.energy.len()
    }

    pub fn energy(&self, s: usize) -> f64 {
        self.energy[s]
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn profile(&self, s: usize) -> GridProfile {
        decode(&self.template, &self.free, s)
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        a != b && ((a ^ b).count_ones() as usize) <= self.k
    }

    fn for_neighbours(&self, s: usize, allowed: &[usize], mut visit: impl FnMut(usize)) {
        if !self.masks.is_empty() && self.masks.len() < allowed.len() {
            for &m in &self.masks {
                visit(s ^ m as usize);
            }
        } else {
            for &t in allowed {
                if self.adjacent(s, t) {
                    visit(t);
                }
            }
        }
    }

    /// BFS from the start through states with energy `≤ level`; parents of
    /// the reached states.
    fn reach(&self, level: f64) -> Vec<Option<usize>> {
        let allowed: Vec<usize> = (0..self.states()).filter(|&s| self.energy[s] <= level).collect();
        let mut parent = vec![None; self.states()];
        if self.energy[self.start] > level {
            return parent;
        }
        parent[self.start] = Some(self.start);
        let mut queue = VecDeque::from([self.start]);
        while let Some(s) = queue.pop_front() {
            if s == 0 {
                break;
            }
            self.for_neighbours(s, &allowed, |t| {
                if parent[t].is_none() && self.energy[t] <= level {
                    parent[t] = Some(s);
                    queue.push_back(t);
                }
            });
        }
        parent
    }
}

fn decode(template: &GridProfile, free: &[usize], s: usize) -> GridProfile {
    let mut cells = template.cells().to_vec();
    for (b, &c) in free.iter().enumerate() {
        cells[c] = s >> b & 1 == 1;
    }
    GridProfile::from_cells(template.n(), template.margin(), cells).expect("free cells only")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridBarrier {
    /// `K̂^r = bottleneck − F^r(u₀)`.
    pub k_hat: f64,
    pub bottleneck: f64,
    pub f_start: f64,
    pub jump_cells: usize,
    pub states: usize,
    /// Witness path from `u₀` to the plus phase (empty when `u₀` is plus).
    pub path: Vec<GridProfile>,
}

fn path_from(graph: &ProfileGraph, parent: &[Option<usize>]) -> Vec<GridProfile> {
    let mut states = vec![0usize];
    let mut s = 0usize;
    while s != graph.start {
        s = parent[s].expect("target reached");
        states.push(s);
    }
    states.reverse();
    states.into_iter().map(|s| graph.profile(s)).collect()
}

fn grid_of(u0: &PhaseProfile) -> Result<&GridProfile> {
    match u0 {
        PhaseProfile::Grid(g) => Ok(g),
        _ => Err(Error::Unsupported("the minimax search needs a grid initial profile".into())),
    }
}

/// Minimal over paths from `u₀` to the plus phase (jumps of at most `k`
/// cells) of the largest `F^r` met, minus `F^r(u₀)`. Binary search over
/// the sorted energy levels with BFS reachability.
pub fn barrier_grid_minimax(u0: &PhaseProfile, tr: &ReducedTension, tq: &SurfaceTensionFn, k: usize) -> Result<GridBarrier> {
    let g0 = grid_of(u0)?;
    tr.validate(u0, tq)?;
    let graph = ProfileGraph::new(g0, tr, tq, k)?;
    let f_start = graph.energy(graph.start);
    if graph.start == 0 {
        return Ok(GridBarrier { k_hat: 0.0, bottleneck: f_start, f_start, jump_cells: k, states: graph.states(), path: Vec::new() });
    }
    let floor = f_start.max(graph.energy(0));
    let mut levels: Vec<f64> = graph.energy.iter().copied().filter(|&e| e >= floor).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let (mut lo, mut hi) = (0usize, levels.len() - 1);
    if graph.reach(levels[hi])[0].is_none() {
        return Err(Error::Numerical("plus phase unreachable at the top level".into()));
    }
    while lo < hi {
        let mid = (lo + hi) / 2;
        if graph.reach(levels[mid])[0].is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let parent = graph.reach(levels[lo]);
    Ok(GridBarrier {
        k_hat: levels[lo] - f_start,
        bottleneck: levels[lo],
        f_start,
        jump_cells: k,
        states: graph.states(),
        path: path_from(&graph, &parent),
    })
}

/// Same value by a widest-path Dijkstra: labels are the smallest possible
/// running maximum of `F^r`.
pub fn barrier_grid_minimax_dijkstra(
    u0: &PhaseProfile,
    tr: &ReducedTension,
    tq: &SurfaceTensionFn,
    k: usize,
) -> Result<GridBarrier> {
    let g0 = grid_of(u0)?;
    tr.validate(u0, tq)?;
    let graph = ProfileGraph::new(g0, tr, tq, k)?;
    let f_start = graph.energy(graph.start);
    let n = graph.states();
    let all: Vec<usize> = (0..n).collect();
    let mut label = vec![f64::INFINITY; n];
    let mut parent = vec![None; n];
    let mut done = vec![false; n];
    label[graph.start] = f_start;
    parent[graph.start] = Some(graph.start);
    let mut heap = BinaryHeap::from([Reverse((Ord(f_start), graph.start))]);
    while let Some(Reverse((Ord(l), s))) = heap.pop() {
        if done[s] {
            continue;
        }
        done[s] = true;
        if s == 0 {
            break;
        }
        graph.for_neighbours(s, &all, |t| {
            let cand = l.max(graph.energy(t));
            if !done[t] && cand < label[t] {
                label[t] = cand;
                parent[t] = Some(s);
                heap.push(Reverse((Ord(cand), t)));
            }
        });
    }
    let path = if graph.start == 0 { Vec::new() } else { path_from(&graph, &parent) };
    Ok(GridBarrier { k_hat: label[0] - f_start, bottleneck: label[0], f_start, jump_cells: k, states: n, path })
}

#[derive(Clone, Copy, Debug)]
struct Ord(f64);

impl PartialEq for Ord {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for Ord {}

impl PartialOrd for Ord {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl std::cmp::Ord for Ord {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}
