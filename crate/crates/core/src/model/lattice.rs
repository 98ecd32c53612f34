use std::collections::HashMap;
use std::fmt;

use crate::{Error, Result};

/// Integer lattice point.
pub type Point = Vec<i64>;

/// Largest number of sites a box may hold.
pub const MAX_SITES: usize = 1 << 22;

/// A vertex touched by the closed edge set of a box: either a site of the
/// box or one of the exterior vertices adjacent to it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Vertex {
    Site(usize),
    Exterior(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub a: Vertex,
    pub b: Vertex,
}

impl Edge {
    /// Both endpoints lie in the box.
    pub fn is_interior(&self) -> bool {
        matches!((self.a, self.b), (Vertex::Site(_), Vertex::Site(_)))
    }
}

/// A finite domain of `Z^d` together with its edge sets.
///
/// `edges` is the closed edge set `E^w` (every nearest-neighbour edge with at
/// least one endpoint in the box), sorted lexicographically on
/// `(min endpoint, max endpoint)`. The interior set `E` is the subset whose
/// endpoints both lie in the box.
#[derive(Clone)]
pub struct LatticeBox {
    dim: usize,
    half_side: Option<usize>,
    sites: Vec<Point>,
    exterior: Vec<Point>,
    edges: Vec<Edge>,
    vertex_ids: HashMap<Point, Vertex>,
    edge_ids: HashMap<(Vertex, Vertex), usize>,
    adjacency: Vec<Vec<(Vertex, usize)>>,
}

impl fmt::Debug for LatticeBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LatticeBox")
            .field("dim", &self.dim)
            .field("half_side", &self.half_side)
            .field("sites", &self.sites.len())
            .field("edges", &self.edges.len())
            .finish()
    }
}

impl PartialEq for LatticeBox {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.sites == other.sites
    }
}

impl LatticeBox {
    /// The symmetric box `{-n, ..., n}^d`.
    pub fn symmetric(dim: usize, n: usize) -> Result<Self> {
        let n = n as i64;
        let ranges = vec![(-n, n); dim];
        let mut b = Self::from_ranges(&ranges)?;
        b.half_side = Some(n as usize);
        Ok(b)
    }

    /// The axis-aligned box `Π [lo_k, hi_k]` (inclusive bounds).
    pub fn from_ranges(ranges: &[(i64, i64)]) -> Result<Self> {
        let dim = ranges.len();
        if dim == 0 {
            return Err(Error::Capacity("dimension must be at least 1".into()));
        }
        let mut count: usize = 1;
        for &(lo, hi) in ranges {
            if hi < lo {
                return Err(Error::Domain(format!("empty range [{lo}, {hi}]")));
            }
            count = count
                .checked_mul((hi - lo + 1) as usize)
                .filter(|&c| c <= MAX_SITES)
                .ok_or_else(|| Error::Capacity(format!("box exceeds {MAX_SITES} sites")))?;
        }
        let mut sites = Vec::with_capacity(count);
        let mut p: Point = ranges.iter().map(|r| r.0).collect();
        loop {
            sites.push(p.clone());
            let mut k = dim;
            loop {
                if k == 0 {
                    return Self::from_sites(dim, sites);
                }
                k -= 1;
                if p[k] < ranges[k].1 {
                    p[k] += 1;
                    break;
                }
                p[k] = ranges[k].0;
            }
        }
    }

    /// Box with an explicit vertex set. Sites are sorted lexicographically
    /// and duplicates removed.
    pub fn from_sites(dim: usize, mut sites: Vec<Point>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Capacity("dimension must be at least 1".into()));
        }
        if sites.is_empty() {
            return Err(Error::Domain("box must contain at least one site".into()));
        }
        if sites.len() > MAX_SITES {
            return Err(Error::Capacity(format!("box exceeds {MAX_SITES} sites")));
        }
        if let Some(p) = sites.iter().find(|p| p.len() != dim) {
            return Err(Error::Domain(format!("point {p:?} is not {dim}-dimensional")));
        }
        sites.sort();
        sites.dedup();

        let mut vertex_ids: HashMap<Point, Vertex> = sites
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), Vertex::Site(i)))
            .collect();
        let mut exterior: Vec<Point> = Vec::new();
        for p in &sites {
            for q in unit_neighbours(p) {
                if !vertex_ids.contains_key(&q) {
                    exterior.push(q);
                }
            }
        }
        exterior.sort();
        exterior.dedup();
        for (i, q) in exterior.iter().enumerate() {
            vertex_ids.insert(q.clone(), Vertex::Exterior(i));
        }

        let mut raw: Vec<(Point, Point)> = Vec::new();
        for p in &sites {
            for q in unit_neighbours(p) {
                let q_is_site = matches!(vertex_ids.get(&q), Some(Vertex::Site(_)));
                // interior edges are generated from their smaller endpoint only
                if q_is_site && q < *p {
                    continue;
                }
                let (lo, hi) = if *p < q { (p.clone(), q) } else { (q, p.clone()) };
                raw.push((lo, hi));
            }
        }
        raw.sort();
        raw.dedup();

        let mut edges = Vec::with_capacity(raw.len());
        let mut edge_ids = HashMap::with_capacity(raw.len());
        let mut adjacency = vec![Vec::with_capacity(2 * dim); sites.len()];
        for (idx, (lo, hi)) in raw.into_iter().enumerate() {
            let a = vertex_ids[&lo];
            let b = vertex_ids[&hi];
            edges.push(Edge { a, b });
            edge_ids.insert((a, b), idx);
            if let Vertex::Site(i) = a {
                adjacency[i].push((b, idx));
            }
            if let Vertex::Site(j) = b {
                adjacency[j].push((a, idx));
            }
        }
        Ok(LatticeBox {
            dim,
            half_side: None,
            sites,
            exterior,
            edges,
            vertex_ids,
            edge_ids,
            adjacency,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Some(n)` for the symmetric box `{-n..n}^d`.
    pub fn half_side(&self) -> Option<usize> {
        self.half_side
    }

    /// Number of sites `|Λ|`.
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[Point] {
        &self.sites
    }

    pub fn exterior(&self) -> &[Point] {
        &self.exterior
    }

    /// Closed edge set `E^w(Λ)` in canonical order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Indices (into [`Self::edges`]) of the interior edge set `E(Λ)`.
    pub fn interior_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_interior())
            .map(|(i, _)| i)
    }

    pub fn point(&self, v: Vertex) -> &Point {
        match v {
            Vertex::Site(i) => &self.sites[i],
            Vertex::Exterior(i) => &self.exterior[i],
        }
    }

    pub fn vertex(&self, p: &[i64]) -> Option<Vertex> {
        self.vertex_ids.get(p).copied()
    }

    pub fn site_index(&self, p: &[i64]) -> Option<usize> {
        match self.vertex(p) {
            Some(Vertex::Site(i)) => Some(i),
            _ => None,
        }
    }

    /// Index of the site at the origin, when the box contains it.
    pub fn origin(&self) -> Option<usize> {
        self.site_index(&vec![0; self.dim])
    }

    /// Canonical index of the edge joining two points, if it belongs to
    /// `E^w(Λ)`.
    pub fn edge_between(&self, p: &[i64], q: &[i64]) -> Option<usize> {
        let a = self.vertex(p)?;
        let b = self.vertex(q)?;
        let key = if p < q { (a, b) } else { (b, a) };
        self.edge_ids.get(&key).copied()
    }

    /// Neighbours of site `i` with the connecting edge index, in canonical
    /// edge order.
    pub fn neighbours(&self, i: usize) -> &[(Vertex, usize)] {
        &self.adjacency[i]
    }

    /// Endpoints of edge `e` as points.
    pub fn edge_points(&self, e: usize) -> (&Point, &Point) {
        let edge = self.edges[e];
        (self.point(edge.a), self.point(edge.b))
    }
}

/// The `2d` nearest neighbours of `p`, ordered by axis then sign.
pub fn unit_neighbours(p: &[i64]) -> impl Iterator<Item = Point> + '_ {
    (0..p.len()).flat_map(move |k| {
        [-1i64, 1].into_iter().map(move |s| {
            let mut q = p.to_vec();
            q[k] += s;
            q
        })
    })
}

pub fn norm1(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count_interior(b: &LatticeBox) -> usize {
        b.interior_edges().count()
    }

    #[test]
    fn hand_counted_boxes() {
        let b = LatticeBox::symmetric(1, 1).unwrap();
        assert_eq!(b.len(), 3);
        assert_eq!(count_interior(&b), 2);
        assert_eq!(b.edges().len(), 4);

        let b = LatticeBox::symmetric(2, 0).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(count_interior(&b), 0);
        assert_eq!(b.edges().len(), 4);
    }

    #[test]
    fn three_by_three_edges_match_brute_force() {
        let b = LatticeBox::symmetric(2, 1).unwrap();
        assert_eq!(b.len(), 9);
        // brute force: all unordered nearest-neighbour pairs with at least one
        // endpoint in the box
        let inside = |p: &[i64]| p.iter().all(|c| c.abs() <= 1);
        let mut closed = 0;
        let mut interior = 0;
        for x in -2..=2i64 {
            for y in -2..=2i64 {
                for (dx, dy) in [(1, 0), (0, 1)] {
                    let p = [x, y];
                    let q = [x + dx, y + dy];
                    if inside(&p) || inside(&q) {
                        closed += 1;
                        if inside(&p) && inside(&q) {
                            interior += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(interior, 12);
        assert_eq!(closed, 24);
        assert_eq!(count_interior(&b), interior);
        assert_eq!(b.edges().len(), closed);
    }

    #[test]
    fn edges_are_unit_length_and_sorted() {
        let b = LatticeBox::symmetric(3, 1).unwrap();
        assert_eq!(b.len(), 27);
        let mut prev: Option<(Point, Point)> = None;
        for e in 0..b.edges().len() {
            let (p, q) = b.edge_points(e);
            let d2: i64 = p.iter().zip(q).map(|(a, c)| (a - c) * (a - c)).sum();
            assert_eq!(d2, 1);
            assert!(p < q);
            let key = (p.clone(), q.clone());
            if let Some(pk) = &prev {
                assert!(*pk < key);
            }
            prev = Some(key);
            assert_eq!(b.edge_between(p, q), Some(e));
            assert_eq!(b.edge_between(q, p), Some(e));
        }
        for i in 0..b.len() {
            assert_eq!(b.neighbours(i).len(), 6);
        }
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(matches!(LatticeBox::symmetric(0, 2), Err(Error::Capacity(_))));
        assert!(matches!(LatticeBox::symmetric(2, 5000), Err(Error::Capacity(_))));
    }

    #[test]
    fn norms() {
        let x = [3.0, -4.0];
        assert_eq!(norm1(&x), 7.0);
        assert_eq!(norm2(&x), 5.0);
        assert_eq!(norm_inf(&x), 4.0);
    }
}
