use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Surface tension `τ^q(n)` of the pure-phase interface as a function of
/// the unit normal, in two dimensions. Evaluated 1-homogeneously on
/// non-unit vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurfaceTensionFn {
    Isotropic { value: f64 },
    /// `τ(n) = ‖n‖₁`.
    L1,
    /// `(angle, value)` samples, completed under the eight symmetries of
    /// the square lattice and interpolated linearly in the angle.
    Table { samples: Vec<(f64, f64)> },
}

impl SurfaceTensionFn {
    pub fn isotropic(value: f64) -> Self {
        SurfaceTensionFn::Isotropic { value }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SurfaceTensionFn::Isotropic { value } => {
                if !(value.is_finite() && *value > 0.0) {
                    return Err(Error::Domain(format!("isotropic tension {value} must be positive")));
                }
            }
            SurfaceTensionFn::L1 => {}
            SurfaceTensionFn::Table { .. } => {
                self.completed()?;
            }
        }
        Ok(())
    }

    /// Symmetry-completed table sorted by angle in `[0, 2π)`.
    pub fn completed(&self) -> Result<Vec<(f64, f64)>> {
        let SurfaceTensionFn::Table { samples } = self else {
            return Err(Error::Contract("only tables are completed".into()));
        };
        if samples.is_empty() {
            return Err(Error::Domain("empty tension table".into()));
        }
        let mut all = Vec::new();
        for &(a, v) in samples {
            if !(a.is_finite() && v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("tension sample ({a}, {v}) must be finite and positive")));
            }
            for k in 0..4 {
                let r = k as f64 * FRAC_PI_2;
                all.push(((a + r).rem_euclid(TAU), v));
                all.push(((r - a).rem_euclid(TAU), v));
            }
        }
        all.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (a, v) in all {
            match out.last() {
                Some(&(b, w)) if (a - b).abs() < 1e-12 => {
                    if (v - w).abs() > 1e-12 * v.max(w) {
                        return Err(Error::Domain(format!("symmetric images disagree at angle {a}: {v} vs {w}")));
                    }
                }
                _ => out.push((a, v)),
            }
        }
        if out.len() > 1 && out[0].0 + TAU - out[out.len() - 1].0 < 1e-12 {
            let (a, v) = out.pop().expect("nonempty");
            if (v - out[0].1).abs() > 1e-12 * v {
                return Err(Error::Domain(format!("symmetric images disagree at angle {a}")));
            }
        }
        Ok(out)
    }

    /// `τ(n)` for any nonzero vector; `τ(0) = 0`.
    pub fn eval(&self, n: [f64; 2]) -> f64 {
        let len = n[0].hypot(n[1]);
        if len == 0.0 {
            return 0.0;
        }
        match self {
            SurfaceTensionFn::Isotropic { value } => value * len,
            SurfaceTensionFn::L1 => n[0].abs() + n[1].abs(),
            SurfaceTensionFn::Table { .. } => {
                let table = self.completed().expect("validated table");
                len * interpolate(&table, n[1].atan2(n[0]).rem_euclid(TAU))
            }
        }
    }

    pub fn at_angle(&self, phi: f64) -> f64 {
        self.eval([phi.cos(), phi.sin()])
    }

    /// `τ(e₁)`.
    pub fn axis(&self) -> f64 {
        self.eval([1.0, 0.0])
    }

    pub fn min_over_normals(&self) -> f64 {
        match self {
            SurfaceTensionFn::Isotropic { value } => *value,
            SurfaceTensionFn::L1 => 1.0,
            SurfaceTensionFn::Table { .. } => {
                self.completed().map(|t| t.iter().map(|p| p.1).fold(f64::INFINITY, f64::min)).unwrap_or(0.0)
            }
        }
    }

    pub fn max_over_normals(&self) -> f64 {
        match self {
            SurfaceTensionFn::Isotropic { value } => *value,
            SurfaceTensionFn::L1 => 2f64.sqrt(),
            SurfaceTensionFn::Table { .. } => {
                self.completed().map(|t| t.iter().map(|p| p.1).fold(0.0, f64::max)).unwrap_or(f64::INFINITY)
            }
        }
    }

    pub fn is_isotropic(&self) -> bool {
        matches!(self, SurfaceTensionFn::Isotropic { .. })
    }
}

fn interpolate(table: &[(f64, f64)], a: f64) -> f64 {
    if table.len() == 1 {
        return table[0].1;
    }
    let i = table.partition_point(|p| p.0 <= a);
    let last = table[table.len() - 1];
    let (lo, hi) = if i == 0 {
        ((last.0 - TAU, last.1), table[0])
    } else if i == table.len() {
        (last, (table[0].0 + TAU, table[0].1))
    } else {
        (table[i - 1], table[i])
    };
    let w = (a - lo.0) / (hi.0 - lo.0);
    lo.1 + w * (hi.1 - lo.1)
}

/// Angle of a direction, in `[0, 2π)`.
pub fn angle_of(v: [f64; 2]) -> f64 {
    v[1].atan2(v[0]).rem_euclid(TAU)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use proptest::prelude::*;

    #[test]
    fn closed_forms() {
        assert_eq!(SurfaceTensionFn::L1.eval([3.0, -4.0]), 7.0);
        assert_eq!(SurfaceTensionFn::isotropic(2.0).eval([3.0, 4.0]), 10.0);
    }

    #[test]
    fn table_completion() {
        let t = SurfaceTensionFn::Table { samples: vec![(0.0, 1.0), (PI / 4.0, 1.5)] };
        let c = t.completed().unwrap();
        assert_eq!(c.len(), 8);
        assert!((t.eval([0.0, -1.0]) - 1.0).abs() < 1e-12);
        assert!((t.at_angle(PI / 8.0) - 1.25).abs() < 1e-12);
        let bad = SurfaceTensionFn::Table { samples: vec![(0.1, 1.0), (-0.1, 2.0)] };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn table_is_lattice_symmetric(a in 0.05..0.75f64, v in 0.5f64..2.0, phi in 0.0..TAU) {
            let t = SurfaceTensionFn::Table { samples: vec![(0.0, 1.0), (a, v)] };
            let x = t.at_angle(phi);
            for img in [-phi, phi + FRAC_PI_2, PI - phi, FRAC_PI_2 - phi] {
                prop_assert!((t.at_angle(img) - x).abs() < 1e-9);
            }
        }
    }
}
