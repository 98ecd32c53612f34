//! Edge-configuration dumps: one line `x1,…,xd,y1,…,yd,b` per edge with
//! `b ∈ {0,1}`, in the box's canonical edge order.

use std::fmt::Write as _;

use crate::model::{LatticeBox, Point};
use crate::{Error, Result};

pub fn write_omega(lattice: &LatticeBox, omega: &[bool]) -> Result<String> {
    if omega.len() != lattice.edges().len() {
        return Err(Error::Domain("configuration length differs from the edge count".into()));
    }
    let mut out = String::new();
    for (e, &b) in omega.iter().enumerate() {
        let (p, q) = lattice.edge_points(e);
        for c in p.iter().chain(q.iter()) {
            let _ = write!(out, "{c},");
        }
        let _ = writeln!(out, "{}", b as u8);
    }
    Ok(out)
}

/// Raw lines of a dump.
pub fn parse_omega_lines(text: &str) -> Result<Vec<(Point, Point, bool)>> {
    let mut out = Vec::new();
    let mut dim = None;
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 3 || cols.len() % 2 == 0 {
            return Err(Error::parse(ln, "expected 2d coordinates and a state"));
        }
        let d = (cols.len() - 1) / 2;
        if *dim.get_or_insert(d) != d {
            return Err(Error::parse(ln, "dimension changes between lines"));
        }
        let coords: Vec<i64> = cols[..2 * d]
            .iter()
            .map(|c| c.trim().parse::<i64>().map_err(|_| Error::parse(ln, format!("bad coordinate `{c}`"))))
            .collect::<Result<_>>()?;
        let b = match cols[2 * d].trim() {
            "0" => false,
            "1" => true,
            other => return Err(Error::parse(ln, format!("edge state `{other}` is not 0 or 1"))),
        };
        out.push((coords[..d].to_vec(), coords[d..].to_vec(), b));
    }
    Ok(out)
}

/// Read a dump onto a box; every edge of `E^w` must appear exactly once.
pub fn read_omega(lattice: &LatticeBox, text: &str) -> Result<Vec<bool>> {
    let mut out: Vec<Option<bool>> = vec![None; lattice.edges().len()];
    for (k, (p, q, b)) in parse_omega_lines(text)?.into_iter().enumerate() {
        let e = lattice
            .edge_between(&p, &q)
            .ok_or_else(|| Error::parse(k + 1, "edge is not in the closed edge set"))?;
        if out[e].replace(b).is_some() {
            return Err(Error::parse(k + 1, "duplicate edge"));
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(e, b)| b.ok_or_else(|| Error::parse(0, format!("edge {e} missing"))))
        .collect()
}
