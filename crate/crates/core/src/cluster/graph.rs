use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::model::{LatticeBox, Point, Vertex};
use crate::{Error, Result};

/// Boundary condition of the random-cluster measure: how the vertices of
/// an edge set are connected outside of it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Wiring {
    /// No connections outside the edge set.
    Free,
    /// Every boundary vertex is joined to a single exterior component.
    Wired,
    /// Boundary vertices joined block by block (vertex indices).
    Partition(Vec<Vec<usize>>),
}

/// A finite edge set of `Z^d` with its vertices.
///
/// A vertex is on the boundary when fewer than `2d` of its lattice edges
/// belong to the set, i.e. it touches the complement through which a wiring
/// acts.
#[derive(Clone, Debug)]
pub struct EdgeGraph {
    dim: usize,
    points: Vec<Point>,
    edges: Vec<(usize, usize)>,
    boundary: Vec<bool>,
}

impl EdgeGraph {
    /// Edge set given by endpoint pairs, in the order supplied.
    pub fn from_point_edges(dim: usize, pairs: &[(Point, Point)]) -> Result<Self> {
        let mut ids: HashMap<Point, usize> = HashMap::new();
        let mut points = Vec::new();
        let mut edges = Vec::with_capacity(pairs.len());
        let mut id = |p: &Point, points: &mut Vec<Point>| -> usize {
            *ids.entry(p.clone()).or_insert_with(|| {
                points.push(p.clone());
                points.len() - 1
            })
        };
        for (p, q) in pairs {
            if p.len() != dim || q.len() != dim {
                return Err(Error::Domain("endpoint dimension mismatch".into()));
            }
            let dist: i64 = p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum();
            if dist != 1 {
                return Err(Error::Domain(format!("{p:?}-{q:?} is not a nearest-neighbour edge")));
            }
            let a = id(p, &mut points);
            let b = id(q, &mut points);
            edges.push((a, b));
        }
        let mut degree = vec![0usize; points.len()];
        for &(a, b) in &edges {
            degree[a] += 1;
            degree[b] += 1;
        }
        let boundary = degree.iter().map(|&k| k < 2 * dim).collect();
        Ok(EdgeGraph { dim, points, edges, boundary })
    }

    /// The closed edge set `E^w(Λ)`. Vertex `i < |Λ|` is site `i`; the
    /// exterior vertices follow in the box's order. Edges keep the box's
    /// canonical order.
    pub fn closed(lattice: &LatticeBox) -> Self {
        let n = lattice.len();
        let idx = |v: Vertex| match v {
            Vertex::Site(i) => i,
            Vertex::Exterior(j) => n + j,
        };
        let mut points = lattice.sites().to_vec();
        points.extend(lattice.exterior().iter().cloned());
        let edges: Vec<(usize, usize)> = lattice.edges().iter().map(|e| (idx(e.a), idx(e.b))).collect();
        let boundary = (0..points.len()).map(|v| v >= n).collect();
        EdgeGraph { dim: lattice.dim(), points, edges, boundary }
    }

    /// The interior edge set `E(Λ)` with the box's sites as vertices.
    pub fn interior(lattice: &LatticeBox) -> Result<Self> {
        let pairs: Vec<(Point, Point)> = lattice
            .interior_edges()
            .map(|e| {
                let (p, q) = lattice.edge_points(e);
                (p.clone(), q.clone())
            })
            .collect();
        Self::from_point_edges(lattice.dim(), &pairs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_vertices(&self) -> usize {
        self.points.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn vertex_of(&self, p: &[i64]) -> Option<usize> {
        self.points.iter().position(|q| q.as_slice() == p)
    }

    pub fn check_wiring(&self, wiring: &Wiring) -> Result<()> {
        if let Wiring::Partition(blocks) = wiring {
            let mut seen = vec![false; self.points.len()];
            for &v in blocks.iter().flatten() {
                if v >= self.points.len() || !self.boundary[v] {
                    return Err(Error::Domain(format!("vertex {v} is not a boundary vertex")));
                }
                if std::mem::replace(&mut seen[v], true) {
                    return Err(Error::Domain(format!("vertex {v} appears in two blocks")));
                }
            }
        }
        Ok(())
    }
}

/// Union-find with path halving, reusable across configurations. Slot
/// `n` is the exterior node used by the wired boundary condition.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub fn reset(&mut self) {
        for (i, p) in self.parent.iter_mut().enumerate() {
            *p = i;
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns true when the two sets were distinct.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Reusable cluster counter for one graph and wiring.
#[derive(Clone, Debug)]
pub struct ClusterCounter<'g> {
    graph: &'g EdgeGraph,
    uf: UnionFind,
    /// Union operations implementing the wiring.
    links: Vec<(usize, usize)>,
    has_exterior_node: bool,
}

impl<'g> ClusterCounter<'g> {
    pub fn new(graph: &'g EdgeGraph, wiring: &Wiring) -> Result<Self> {
        graph.check_wiring(wiring)?;
        let n = graph.num_vertices();
        let mut links = Vec::new();
        let mut has_exterior_node = false;
        match wiring {
            Wiring::Free => {}
            Wiring::Wired => {
                for v in 0..n {
                    if graph.is_boundary(v) {
                        links.push((v, n));
                        has_exterior_node = true;
                    }
                }
            }
            Wiring::Partition(blocks) => {
                for b in blocks {
                    for w in b.windows(2) {
                        links.push((w[0], w[1]));
                    }
                }
            }
        }
        Ok(ClusterCounter { graph, uf: UnionFind::new(n + 1), links, has_exterior_node })
    }

    fn build(&mut self, open: impl Fn(usize) -> bool, skip: Option<usize>) {
        self.uf.reset();
        for &(a, b) in &self.links {
            self.uf.union(a, b);
        }
        for (e, &(a, b)) in self.graph.edges().iter().enumerate() {
            if Some(e) != skip && open(e) {
                self.uf.union(a, b);
            }
        }
    }

    fn count_roots(&mut self) -> usize {
        let n = self.graph.num_vertices();
        // unions keep the smaller index as root, so the exterior node never
        // is one once anything is wired to it
        (0..n).filter(|&v| self.uf.find(v) == v).count()
    }

    /// `C^π_E(ω)` for `ω` given as a bitmask over edges.
    pub fn count_bits(&mut self, omega: u64) -> usize {
        self.build(|e| omega >> e & 1 == 1, None);
        self.count_roots()
    }

    pub fn count(&mut self, omega: &[bool]) -> usize {
        self.build(|e| omega[e], None);
        self.count_roots()
    }

    /// Whether the endpoints of `e` are joined in `(ω without e) ∨ π`.
    pub fn endpoints_connected_without(&mut self, omega: &[bool], e: usize) -> bool {
        self.build(|f| omega[f], Some(e));
        let (a, b) = self.graph.edges()[e];
        self.uf.find(a) == self.uf.find(b)
    }

    /// Component labels (root per vertex) for `ω`, and whether each root is
    /// joined to the exterior.
    pub fn components(&mut self, omega: &[bool]) -> (Vec<usize>, Vec<bool>) {
        self.build(|e| omega[e], None);
        let n = self.graph.num_vertices();
        let ext = if self.has_exterior_node { Some(self.uf.find(n)) } else { None };
        let roots: Vec<usize> = (0..n).map(|v| self.uf.find(v)).collect();
        let wired = roots.iter().map(|&r| Some(r) == ext).collect();
        (roots, wired)
    }
}

/// Number of clusters of `ω ∨ π` among the vertices of `E`.
pub fn cluster_count(graph: &EdgeGraph, omega: &[bool], wiring: &Wiring) -> Result<usize> {
    if omega.len() != graph.num_edges() {
        return Err(Error::Domain("configuration length differs from the edge count".into()));
    }
    Ok(ClusterCounter::new(graph, wiring)?.count(omega))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_counts() {
        let l = LatticeBox::from_ranges(&[(0, 2), (0, 0)]).unwrap();
        let g = EdgeGraph::interior(&l).unwrap();
        assert_eq!(g.num_edges(), 2);
        assert_eq!(cluster_count(&g, &[false, false], &Wiring::Free).unwrap(), 3);
        assert_eq!(cluster_count(&g, &[true, true], &Wiring::Free).unwrap(), 1);
        // every vertex of a path touches the complement, so wiring joins all
        assert_eq!(cluster_count(&g, &[false, false], &Wiring::Wired).unwrap(), 1);
        let single = EdgeGraph::from_point_edges(2, &[(vec![0, 0], vec![1, 0])]).unwrap();
        assert_eq!(cluster_count(&single, &[false], &Wiring::Wired).unwrap(), 1);
        assert_eq!(cluster_count(&single, &[false], &Wiring::Free).unwrap(), 2);
        assert_eq!(cluster_count(&single, &[false], &Wiring::Partition(vec![vec![0], vec![1]])).unwrap(), 2);
    }

    #[test]
    fn closed_set_wiring() {
        let l = LatticeBox::symmetric(2, 0).unwrap();
        let g = EdgeGraph::closed(&l);
        assert_eq!((g.num_vertices(), g.num_edges()), (5, 4));
        assert!(!g.is_boundary(0));
        // site isolated from the wired exterior: two clusters
        assert_eq!(cluster_count(&g, &[false; 4], &Wiring::Wired).unwrap(), 2);
        assert_eq!(cluster_count(&g, &[true, false, false, false], &Wiring::Wired).unwrap(), 1);
        assert_eq!(cluster_count(&g, &[false; 4], &Wiring::Free).unwrap(), 5);
    }

    #[test]
    fn bad_partition_rejected() {
        let l = LatticeBox::symmetric(2, 0).unwrap();
        let g = EdgeGraph::closed(&l);
        assert!(cluster_count(&g, &[false; 4], &Wiring::Partition(vec![vec![0, 1]])).is_err());
        assert!(cluster_count(&g, &[false; 4], &Wiring::Partition(vec![vec![1, 2], vec![2]])).is_err());
    }
}
