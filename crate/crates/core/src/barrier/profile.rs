use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type P2 = [f64; 2];

/// Cell face of an `n × n` grid on `[0,1]²`. `V { i, j }` is the vertical
/// face at `x = i/n` in row `j` (between cells `(i-1, j)` and `(i, j)`);
/// `H { i, j }` the horizontal face at `y = j/n` in column `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Face {
    V { i: usize, j: usize },
    H { i: usize, j: usize },
}

impl Face {
    pub fn normal(&self) -> P2 {
        match self {
            Face::V { .. } => [1.0, 0.0],
            Face::H { .. } => [0.0, 1.0],
        }
    }

    /// The two cells `(low, high)` (left/right or below/above), each
    /// `None` outside the grid.
    pub fn cells(&self, n: usize) -> (Option<(usize, usize)>, Option<(usize, usize)>) {
        let inside = |i: isize, j: isize| (i >= 0 && j >= 0 && (i as usize) < n && (j as usize) < n).then_some((i as usize, j as usize));
        match *self {
            Face::V { i, j } => (inside(i as isize - 1, j as isize), inside(i as isize, j as isize)),
            Face::H { i, j } => (inside(i as isize, j as isize - 1), inside(i as isize, j as isize)),
        }
    }
}

/// Which side of an interface face carries the minus phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MinusSide {
    Low,
    High,
}

/// `n × n` cell field on `[0,1]²`; `minus[i + n j]` marks cell `(i, j)`
/// (column `i`, row `j` from the bottom). Cells within `margin` of the
/// border must be plus, and everything outside the square counts as plus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GridJson", into = "GridJson")]
pub struct GridProfile {
    n: usize,
    margin: usize,
    minus: Vec<bool>,
}

/// JSON form: rows listed top first, `'-'` for minus and `'+'` for plus.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct GridJson {
    n: usize,
    #[serde(default)]
    margin: usize,
    rows: Vec<String>,
}

impl TryFrom<GridJson> for GridProfile {
    type Error = Error;

    fn try_from(g: GridJson) -> Result<Self> {
        let rows: Vec<&str> = g.rows.iter().map(String::as_str).collect();
        let p = GridProfile::from_rows(&rows, g.margin)?;
        if p.n != g.n {
            return Err(Error::Config(format!("declared n = {} but {} rows", g.n, p.n)));
        }
        Ok(p)
    }
}

impl From<GridProfile> for GridJson {
    fn from(p: GridProfile) -> Self {
        GridJson { n: p.n, margin: p.margin, rows: p.rows() }
    }
}

/// Largest grid side accepted.
pub const GRID_MAX: usize = 512;

impl GridProfile {
    pub fn plus(n: usize, margin: usize) -> Result<Self> {
        if n == 0 || n > GRID_MAX {
            return Err(Error::Domain(format!("grid side {n} must lie in 1..={GRID_MAX}")));
        }
        if 2 * margin > n {
            return Err(Error::Domain(format!("margin {margin} leaves no free cells on a {n}-grid")));
        }
        Ok(GridProfile { n, margin, minus: vec![false; n * n] })
    }

    pub fn from_cells(n: usize, margin: usize, minus: Vec<bool>) -> Result<Self> {
        let mut p = Self::plus(n, margin)?;
        if minus.len() != n * n {
            return Err(Error::Domain(format!("{} cells for a {n}-grid", minus.len())));
        }
        p.minus = minus;
        p.validate()?;
        Ok(p)
    }

    /// Rows top first.
    pub fn from_rows(rows: &[&str], margin: usize) -> Result<Self> {
        let n = rows.len();
        let mut p = Self::plus(n, margin)?;
        for (r, row) in rows.iter().enumerate() {
            let chars: Vec<char> = row.chars().collect();
            if chars.len() != n {
                return Err(Error::Config(format!("row {r} has {} cells, expected {n}", chars.len())));
            }
            let j = n - 1 - r;
            for (i, c) in chars.into_iter().enumerate() {
                p.minus[i + n * j] = match c {
                    '-' => true,
                    '+' => false,
                    other => return Err(Error::Config(format!("cell {other:?} is neither '+' nor '-'"))),
                };
            }
        }
        p.validate()?;
        Ok(p)
    }

    /// `side × side` block of minus cells with lower-left cell `(i0, j0)`.
    pub fn block(n: usize, margin: usize, i0: usize, j0: usize, side: usize) -> Result<Self> {
        let mut p = Self::plus(n, margin)?;
        for j in j0..j0 + side {
            for i in i0..i0 + side {
                if i >= n || j >= n {
                    return Err(Error::Domain("block leaves the grid".into()));
                }
                p.minus[i + n * j] = true;
            }
        }
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for j in 0..self.n {
            for i in 0..self.n {
                if self.minus[i + self.n * j] && !self.is_free(i, j) {
                    return Err(Error::Domain(format!("cell ({i},{j}) lies in the plus margin")));
                }
            }
        }
        Ok(())
    }

    pub fn rows(&self) -> Vec<String> {
        (0..self.n)
            .rev()
            .map(|j| (0..self.n).map(|i| if self.minus[i + self.n * j] { '-' } else { '+' }).collect())
            .collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    pub fn cells(&self) -> &[bool] {
        &self.minus
    }

    pub fn is_free(&self, i: usize, j: usize) -> bool {
        let m = self.margin;
        i >= m && j >= m && i + m < self.n && j + m < self.n
    }

    /// Indices `i + n j` of cells outside the margin.
    pub fn free_cells(&self) -> Vec<usize> {
        (0..self.n * self.n).filter(|&c| self.is_free(c % self.n, c / self.n)).collect()
    }

    pub fn is_minus(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && self.minus[i + self.n * j]
    }

    fn at(&self, c: Option<(usize, usize)>) -> bool {
        c.is_some_and(|(i, j)| self.minus[i + self.n * j])
    }

    pub fn set(&mut self, i: usize, j: usize, minus: bool) -> Result<()> {
        if minus && !self.is_free(i, j) {
            return Err(Error::Domain(format!("cell ({i},{j}) lies in the plus margin")));
        }
        self.minus[i + self.n * j] = minus;
        Ok(())
    }

    pub fn minus_count(&self) -> usize {
        self.minus.iter().filter(|&&b| b).count()
    }

    pub fn is_plus(&self) -> bool {
        self.minus_count() == 0
    }

    pub fn compatible(&self, other: &GridProfile) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Unsupported(format!("grids of side {} and {}", self.n, other.n)));
        }
        Ok(())
    }

    /// Cellwise set operation, keeping this grid's margin.
    pub fn combine(&self, other: &GridProfile, op: impl Fn(bool, bool) -> bool) -> Result<GridProfile> {
        self.compatible(other)?;
        let minus = self.minus.iter().zip(&other.minus).map(|(&a, &b)| op(a, b)).collect();
        Ok(GridProfile { n: self.n, margin: self.margin.min(other.margin), minus })
    }

    /// Faces between a minus cell and a plus cell (or the outside), with
    /// the side carrying the minus phase.
    pub fn interface(&self) -> Vec<(Face, MinusSide)> {
        let n = self.n;
        let mut out = Vec::new();
        let mut push = |f: Face| {
            let (lo, hi) = f.cells(n);
            match (self.at(lo), self.at(hi)) {
                (true, false) => out.push((f, MinusSide::Low)),
                (false, true) => out.push((f, MinusSide::High)),
                _ => {}
            }
        };
        for j in 0..n {
            for i in 0..=n {
                push(Face::V { i, j });
            }
        }
        for i in 0..n {
            for j in 0..=n {
                push(Face::H { i, j });
            }
        }
        out
    }

    /// Which side of `f` is minus, if `f` is an interface face.
    pub fn minus_side(&self, f: Face) -> Option<MinusSide> {
        let (lo, hi) = f.cells(self.n);
        match (self.at(lo), self.at(hi)) {
            (true, false) => Some(MinusSide::Low),
            (false, true) => Some(MinusSide::High),
            _ => None,
        }
    }

    pub fn area(&self) -> f64 {
        self.minus_count() as f64 / (self.n * self.n) as f64
    }

    fn slice(&self, x: f64) -> Vec<(f64, f64)> {
        let n = self.n;
        let i = (x * n as f64).floor();
        if !(0.0..n as f64).contains(&i) {
            return Vec::new();
        }
        let i = i as usize;
        let h = 1.0 / n as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for j in 0..n {
            if self.minus[i + n * j] {
                let (a, b) = (j as f64 * h, (j + 1) as f64 * h);
                match out.last_mut() {
                    Some(last) if last.1 == a => last.1 = b,
                    _ => out.push((a, b)),
                }
            }
        }
        out
    }
}

/// Piece of the boundary of a minus region, traversed counterclockwise so
/// that the outer normal of a segment `a → b` is `(b − a)` turned
/// clockwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Piece {
    Seg { a: P2, b: P2 },
    /// Arc of a circle bounding a disk-like region from outside, angles
    /// `start < end ≤ start + 2π`.
    Arc { c: P2, r: f64, start: f64, end: f64 },
}

impl Piece {
    pub fn length(&self) -> f64 {
        match *self {
            Piece::Seg { a, b } => (b[0] - a[0]).hypot(b[1] - a[1]),
            Piece::Arc { r, start, end, .. } => r * (end - start),
        }
    }
}

/// Phase profile on `[0,1]²`: the region listed is the minus phase, the
/// rest is plus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "repr", content = "params", rename_all = "snake_case")]
pub enum PhaseProfile {
    /// `u ≡ 1`.
    Plus,
    Grid(GridProfile),
    Disk { center: P2, radius: f64 },
    /// Axis-aligned square.
    Square { center: P2, side: f64 },
    /// Disk with the cap above a horizontal chord removed; the chord
    /// subtends the angle `2θ`, so `θ = 0` is the full disk and `θ = π` is
    /// empty.
    DiskCap { center: P2, radius: f64, theta: f64 },
    /// Square truncated to its lowest `height`.
    SquareSlab { center: P2, side: f64, height: f64 },
    /// Simple polygon, either orientation.
    Polygon { vertices: Vec<P2> },
}

fn ccw(vertices: &[P2]) -> Vec<P2> {
    let mut v = vertices.to_vec();
    if signed_area(&v) < 0.0 {
        v.reverse();
    }
    v
}

pub fn signed_area(v: &[P2]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| {
        let (p, q) = (v[i], v[(i + 1) % n]);
        p[0] * q[1] - q[0] * p[1]
    }).sum::<f64>()
}

fn segments_cross(p1: P2, p2: P2, q1: P2, q2: P2) -> bool {
    let orient = |a: P2, b: P2, c: P2| (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let on = |a: P2, b: P2, c: P2| {
        c[0] >= a[0].min(b[0]) && c[0] <= a[0].max(b[0]) && c[1] >= a[1].min(b[1]) && c[1] <= a[1].max(b[1])
    };
    let (d1, d2) = (orient(q1, q2, p1), orient(q1, q2, p2));
    let (d3, d4) = (orient(p1, p2, q1), orient(p1, p2, q2));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on(q1, q2, p1)) || (d2 == 0.0 && on(q1, q2, p2)) || (d3 == 0.0 && on(p1, p2, q1)) || (d4 == 0.0 && on(p1, p2, q2))
}

fn rect_pieces(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<Piece> {
    let c = [[x0, y0], [x1, y0], [x1, y1], [x0, y1]];
    (0..4).map(|k| Piece::Seg { a: c[k], b: c[(k + 1) % 4] }).collect()
}

impl PhaseProfile {
    pub fn disk(center: P2, radius: f64) -> Self {
        PhaseProfile::Disk { center, radius }
    }

    pub fn square(center: P2, side: f64) -> Self {
        PhaseProfile::Square { center, side }
    }

    pub fn is_grid(&self) -> bool {
        matches!(self, PhaseProfile::Grid(_))
    }

    /// `u ≡ 1`, in either representation.
    pub fn is_plus(&self) -> bool {
        match self {
            PhaseProfile::Plus => true,
            PhaseProfile::Grid(g) => g.is_plus(),
            _ => self.area() == 0.0,
        }
    }

    /// Representation invariants, including positive distance of the
    /// continuum regions from the border of `[0,1]²`.
    pub fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        let inside = |lo: P2, hi: P2| {
            if lo[0] > 0.0 && lo[1] > 0.0 && hi[0] < 1.0 && hi[1] < 1.0 {
                Ok(())
            } else {
                Err(Error::Domain("region must stay at positive distance from the border of [0,1]^2".into()))
            }
        };
        match self {
            PhaseProfile::Plus => Ok(()),
            PhaseProfile::Grid(g) => g.validate(),
            PhaseProfile::Disk { center: c, radius: r } | PhaseProfile::DiskCap { center: c, radius: r, .. } => {
                if !(finite(&[c[0], c[1], *r]) && *r > 0.0) {
                    return Err(Error::Domain(format!("disk radius {r} must be positive")));
                }
                if let PhaseProfile::DiskCap { theta, .. } = self {
                    if !(0.0..=PI).contains(theta) {
                        return Err(Error::Domain(format!("chord angle {theta} must lie in [0, π]")));
                    }
                }
                inside([c[0] - r, c[1] - r], [c[0] + r, c[1] + r])
            }
            PhaseProfile::Square { center: c, side: s } | PhaseProfile::SquareSlab { center: c, side: s, .. } => {
                if !(finite(&[c[0], c[1], *s]) && *s > 0.0) {
                    return Err(Error::Domain(format!("square side {s} must be positive")));
                }
                if let PhaseProfile::SquareSlab { height, .. } = self {
                    if !(0.0..=*s).contains(height) {
                        return Err(Error::Domain(format!("slab height {height} must lie in [0, {s}]")));
                    }
                }
                inside([c[0] - s / 2.0, c[1] - s / 2.0], [c[0] + s / 2.0, c[1] + s / 2.0])
            }
            PhaseProfile::Polygon { vertices } => {
                if vertices.len() < 3 || !vertices.iter().all(|p| finite(p)) {
                    return Err(Error::Domain("a polygon needs at least three finite vertices".into()));
                }
                if signed_area(vertices).abs() < 1e-15 {
                    return Err(Error::Domain("degenerate polygon".into()));
                }
                let m = vertices.len();
                for a in 0..m {
                    for b in a + 1..m {
                        if b == a + 1 || (a == 0 && b == m - 1) {
                            continue;
                        }
                        if segments_cross(vertices[a], vertices[(a + 1) % m], vertices[b], vertices[(b + 1) % m]) {
                            return Err(Error::Domain(format!("polygon edges {a} and {b} intersect")));
                        }
                    }
                }
                let lo = [0, 1].map(|k| vertices.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min));
                let hi = [0, 1].map(|k| vertices.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max));
                inside(lo, hi)
            }
        }
    }

    /// Lebesgue measure of the minus region.
    pub fn area(&self) -> f64 {
        match self {
            PhaseProfile::Plus => 0.0,
            PhaseProfile::Grid(g) => g.area(),
            PhaseProfile::Disk { radius: r, .. } => PI * r * r,
            PhaseProfile::Square { side, .. } => side * side,
            PhaseProfile::DiskCap { radius: r, theta, .. } => PI * r * r - 0.5 * r * r * (2.0 * theta - (2.0 * theta).sin()),
            PhaseProfile::SquareSlab { side, height, .. } => side * height,
            PhaseProfile::Polygon { vertices } => signed_area(vertices).abs(),
        }
    }

    /// Boundary pieces of a continuum profile, counterclockwise around the
    /// minus region. Grids have faces instead.
    pub fn pieces(&self) -> Result<Vec<Piece>> {
        Ok(match self {
            PhaseProfile::Plus => Vec::new(),
            PhaseProfile::Grid(_) => return Err(Error::Unsupported("grid profiles have faces, not pieces".into())),
            PhaseProfile::Disk { center, radius } => vec![Piece::Arc { c: *center, r: *radius, start: 0.0, end: TAU }],
            PhaseProfile::Square { center: c, side: s } => {
                rect_pieces(c[0] - s / 2.0, c[1] - s / 2.0, c[0] + s / 2.0, c[1] + s / 2.0)
            }
            PhaseProfile::SquareSlab { center: c, side: s, height } => {
                if *height <= 0.0 {
                    Vec::new()
                } else {
                    let y0 = c[1] - s / 2.0;
                    rect_pieces(c[0] - s / 2.0, y0, c[0] + s / 2.0, y0 + height)
                }
            }
            PhaseProfile::DiskCap { center: c, radius: r, theta } => {
                if *theta >= PI {
                    Vec::new()
                } else if *theta <= 0.0 {
                    vec![Piece::Arc { c: *c, r: *r, start: 0.0, end: TAU }]
                } else {
                    let start = PI / 2.0 + theta;
                    let end = PI / 2.0 - theta + TAU;
                    let at = |a: f64| [c[0] + r * a.cos(), c[1] + r * a.sin()];
                    vec![Piece::Arc { c: *c, r: *r, start, end }, Piece::Seg { a: at(end), b: at(start) }]
                }
            }
            PhaseProfile::Polygon { vertices } => {
                let v = ccw(vertices);
                let m = v.len();
                (0..m).map(|k| Piece::Seg { a: v[k], b: v[(k + 1) % m] }).collect()
            }
        })
    }

    /// Minus part of the vertical line at `x`, as sorted disjoint intervals.
    pub fn slice(&self, x: f64) -> Vec<(f64, f64)> {
        let disk = |c: P2, r: f64| {
            let dx = x - c[0];
            (dx.abs() < r).then(|| {
                let w = (r * r - dx * dx).sqrt();
                (c[1] - w, c[1] + w)
            })
        };
        match self {
            PhaseProfile::Plus => Vec::new(),
            PhaseProfile::Grid(g) => g.slice(x),
            PhaseProfile::Disk { center, radius } => disk(*center, *radius).into_iter().collect(),
            PhaseProfile::DiskCap { center, radius, theta } => disk(*center, *radius)
                .map(|(a, b)| (a, b.min(center[1] + radius * theta.cos())))
                .filter(|(a, b)| b > a)
                .into_iter()
                .collect(),
            PhaseProfile::Square { center: c, side: s } => {
                if (x - c[0]).abs() < s / 2.0 {
                    vec![(c[1] - s / 2.0, c[1] + s / 2.0)]
                } else {
                    Vec::new()
                }
            }
            PhaseProfile::SquareSlab { center: c, side: s, height } => {
                if (x - c[0]).abs() < s / 2.0 && *height > 0.0 {
                    vec![(c[1] - s / 2.0, c[1] - s / 2.0 + height)]
                } else {
                    Vec::new()
                }
            }
            PhaseProfile::Polygon { vertices } => {
                let m = vertices.len();
                let mut ys: Vec<f64> = (0..m)
                    .filter_map(|k| {
                        let (p, q) = (vertices[k], vertices[(k + 1) % m]);
                        let (lo, hi) = if p[0] < q[0] { (p, q) } else { (q, p) };
                        (lo[0] <= x && x < hi[0]).then(|| lo[1] + (x - lo[0]) / (hi[0] - lo[0]) * (hi[1] - lo[1]))
                    })
                    .collect();
                ys.sort_by(f64::total_cmp);
                ys.chunks_exact(2).map(|w| (w[0], w[1])).collect()
            }
        }
    }

    /// `x`-coordinates where the slice may change non-smoothly.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            PhaseProfile::Plus => Vec::new(),
            PhaseProfile::Grid(g) => (0..=g.n).map(|k| k as f64 / g.n as f64).collect(),
            PhaseProfile::Disk { center: c, radius: r } => vec![c[0] - r, c[0], c[0] + r],
            PhaseProfile::DiskCap { center: c, radius: r, theta } => {
                let w = r * theta.sin();
                vec![c[0] - r, c[0] - w, c[0], c[0] + w, c[0] + r]
            }
            PhaseProfile::Square { center: c, side: s } | PhaseProfile::SquareSlab { center: c, side: s, .. } => {
                vec![c[0] - s / 2.0, c[0] + s / 2.0]
            }
            PhaseProfile::Polygon { vertices } => vertices.iter().map(|p| p[0]).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("profile serializes")
    }
}

/// Parse and validate a profile JSON document `{"repr": ..., "params": ...}`.
pub fn parse_profile_json(text: &str) -> Result<PhaseProfile> {
    let p: PhaseProfile = serde_json::from_str(text)?;
    p.validate()?;
    Ok(p)
}
