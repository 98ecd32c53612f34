//! Plain-text disorder files.
//!
//! ```text
//! dilute-ising-J v1 d=2 N=1
//! -2,-1 -1,-1 1.0000000000000000e0
//! ...
//! ```
//!
//! One line per edge of the closed edge set, in canonical order, with the
//! coupling written to 17 significant digits so reading it back reproduces
//! the field bit-for-bit.

use std::fmt::Write as _;
use std::sync::Arc;

use super::disorder::{CouplingField, Provenance};
use super::lattice::{LatticeBox, MAX_SITES};
use crate::{Error, Result};

const MAGIC: &str = "dilute-ising-J";

pub fn write_disorder(field: &CouplingField) -> Result<String> {
    let lattice = field.lattice();
    let n = lattice.half_side().ok_or_else(|| {
        Error::Unsupported("disorder files describe symmetric boxes only".into())
    })?;
    let mut out = format!("{MAGIC} v1 d={} N={n}\n", lattice.dim());
    for (e, v) in field.values().iter().enumerate() {
        let (p, q) = lattice.edge_points(e);
        let _ = writeln!(out, "{} {} {:.16e}", join(p), join(q), v);
    }
    Ok(out)
}

fn join(p: &[i64]) -> String {
    p.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}

fn header_field<'a>(tok: Option<&'a str>, key: &str) -> Result<&'a str> {
    tok.and_then(|t| t.strip_prefix(key))
        .ok_or_else(|| Error::parse(1, format!("expected `{key}<value>` in header")))
}

fn point(tok: &str, d: usize, line: usize) -> Result<Vec<i64>> {
    let p: Vec<i64> = tok
        .split(',')
        .map(|c| c.parse::<i64>().map_err(|_| Error::parse(line, format!("bad coordinate `{c}`"))))
        .collect::<Result<_>>()?;
    if p.len() != d {
        return Err(Error::parse(line, format!("point has {} coordinates, expected {d}", p.len())));
    }
    Ok(p)
}

/// Parse a disorder file. Every edge of the box must appear exactly once.
pub fn read_disorder(text: &str) -> Result<CouplingField> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty input"))?;
    let mut toks = header.split_whitespace();
    if toks.next() != Some(MAGIC) {
        return Err(Error::parse(1, format!("missing `{MAGIC}` magic")));
    }
    if toks.next() != Some("v1") {
        return Err(Error::parse(1, "unsupported version"));
    }
    let d: usize = header_field(toks.next(), "d=")?
        .parse()
        .map_err(|_| Error::parse(1, "bad dimension"))?;
    let n: usize = header_field(toks.next(), "N=")?
        .parse()
        .map_err(|_| Error::parse(1, "bad half side"))?;
    if toks.next().is_some() {
        return Err(Error::parse(1, "trailing header tokens"));
    }
    let side = 2u128 * n as u128 + 1;
    if d == 0 || d > 64 || side.checked_pow(d as u32).is_none_or(|s| s > MAX_SITES as u128) {
        return Err(Error::Capacity(format!("box d={d} N={n} is too large")));
    }
    // |E^w| = d (2N+1)^{d-1} (2N+2); checked before building the box so a
    // short file cannot request a huge allocation.
    let expected = d as u128 * side.pow(d as u32 - 1) * (side + 1);
    let body = text.lines().skip(1).filter(|l| !l.trim().is_empty()).count();
    if body as u128 != expected {
        return Err(Error::parse(0, format!("{body} edge lines, expected {expected}")));
    }
    let lattice = Arc::new(LatticeBox::symmetric(d, n)?);
    let mut values: Vec<Option<f64>> = vec![None; lattice.edges().len()];
    for (ln, line) in lines {
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        let (Some(a), Some(b), Some(j), None) = (toks.next(), toks.next(), toks.next(), toks.next())
        else {
            return Err(Error::parse(ln, "expected `x y J`"));
        };
        let p = point(a, d, ln)?;
        let q = point(b, d, ln)?;
        let v: f64 = j.parse().map_err(|_| Error::parse(ln, format!("bad coupling `{j}`")))?;
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::parse(ln, format!("coupling {v} outside [0,1]")));
        }
        let e = lattice
            .edge_between(&p, &q)
            .ok_or_else(|| Error::parse(ln, "edge is not in the closed edge set"))?;
        if values[e].replace(v).is_some() {
            return Err(Error::parse(ln, "duplicate edge"));
        }
    }
    let values: Vec<f64> = values
        .into_iter()
        .enumerate()
        .map(|(e, v)| v.ok_or_else(|| Error::parse(0, format!("edge {e} missing"))))
        .collect::<Result<_>>()?;
    CouplingField::with_provenance(lattice, values, Provenance::File)
}
