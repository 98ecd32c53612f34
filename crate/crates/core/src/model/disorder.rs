use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::lattice::LatticeBox;
use crate::seeding;
use crate::{Error, Result};

/// Law of a single coupling `J_e`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CouplingLaw {
    /// `J_e = value` almost surely.
    Constant { value: f64 },
    /// `P(J_e = 0) = p_zero`, `P(J_e = 1) = 1 - p_zero`.
    Bernoulli { p_zero: f64 },
    /// Finite support `values[i]` with probabilities `probs[i]`.
    Discrete { values: Vec<f64>, probs: Vec<f64> },
}

/// I.i.d. coupling law plus the master seed of the disorder stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    pub law: CouplingLaw,
    pub seed: u64,
}

impl DisorderSpec {
    pub fn constant(value: f64) -> Self {
        DisorderSpec {
            law: CouplingLaw::Constant { value },
            seed: 0,
        }
    }

    pub fn bernoulli(p_zero: f64, seed: u64) -> Self {
        DisorderSpec {
            law: CouplingLaw::Bernoulli { p_zero },
            seed,
        }
    }

    /// Support points and their probabilities.
    pub fn support(&self) -> (Vec<f64>, Vec<f64>) {
        match &self.law {
            CouplingLaw::Constant { value } => (vec![*value], vec![1.0]),
            CouplingLaw::Bernoulli { p_zero } => (vec![0.0, 1.0], vec![*p_zero, 1.0 - p_zero]),
            CouplingLaw::Discrete { values, probs } => (values.clone(), probs.clone()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (values, probs) = self.support();
        if values.is_empty() || values.len() != probs.len() {
            return Err(Error::Config("support and probabilities must have equal, nonzero length".into()));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Config(format!("coupling value {v} outside [0, 1]")));
        }
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Config(format!("probability {p} outside [0, 1]")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("probabilities sum to {total}, not 1")));
        }
        Ok(())
    }

    /// Smallest support point carrying positive mass (`J^min`).
    pub fn j_min(&self) -> f64 {
        let (v, p) = self.support();
        v.iter()
            .zip(&p)
            .filter(|(_, p)| **p > 0.0)
            .map(|(v, _)| *v)
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest support point carrying positive mass (`J^max`).
    pub fn j_max(&self) -> f64 {
        let (v, p) = self.support();
        v.iter()
            .zip(&p)
            .filter(|(_, p)| **p > 0.0)
            .map(|(v, _)| *v)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `P(J_e = 0)`.
    pub fn p_zero(&self) -> f64 {
        let (v, p) = self.support();
        v.iter().zip(&p).filter(|(v, _)| **v == 0.0).map(|(_, p)| *p).sum()
    }
}

/// Where a coupling field came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum Provenance {
    Sampled { spec: DisorderSpec },
    Uniform { value: f64 },
    File,
    Explicit,
}

/// Quenched couplings on the closed edge set of a box.
#[derive(Clone, Debug)]
pub struct CouplingField {
    lattice: Arc<LatticeBox>,
    values: Vec<f64>,
    provenance: Provenance,
    /// Edge sections forced to zero, in the order they were applied.
    dilutions: Vec<Vec<usize>>,
}

impl CouplingField {
    pub fn uniform(lattice: Arc<LatticeBox>, value: f64) -> Result<Self> {
        check_unit(value)?;
        let n = lattice.edges().len();
        Ok(CouplingField {
            lattice,
            values: vec![value; n],
            provenance: Provenance::Uniform { value },
            dilutions: Vec::new(),
        })
    }

    /// Field with explicit values in canonical edge order.
    pub fn from_values(lattice: Arc<LatticeBox>, values: Vec<f64>) -> Result<Self> {
        Self::with_provenance(lattice, values, Provenance::Explicit)
    }

    pub(crate) fn with_provenance(
        lattice: Arc<LatticeBox>,
        values: Vec<f64>,
        provenance: Provenance,
    ) -> Result<Self> {
        if values.len() != lattice.edges().len() {
            return Err(Error::Domain(format!(
                "{} coupling values for {} edges",
                values.len(),
                lattice.edges().len()
            )));
        }
        for &v in &values {
            check_unit(v)?;
        }
        Ok(CouplingField {
            lattice,
            values,
            provenance,
            dilutions: Vec::new(),
        })
    }

    /// Draw every coupling independently. Edge `e` uses the stream keyed by
    /// `(spec.seed, e)`, so a field is reproducible bit-for-bit and the value
    /// on an edge does not depend on how many other edges are sampled.
    pub fn sample(lattice: Arc<LatticeBox>, spec: &DisorderSpec) -> Result<Self> {
        spec.validate()?;
        let (values, probs) = spec.support();
        let n = lattice.edges().len();
        let mut out = Vec::with_capacity(n);
        for e in 0..n {
            let v = match &spec.law {
                CouplingLaw::Constant { value } => *value,
                _ => {
                    let mut rng = seeding::stream(spec.seed, "coupling", e as u64);
                    let u: f64 = rng.gen();
                    let mut acc = 0.0;
                    let mut pick = values[values.len() - 1];
                    for (v, p) in values.iter().zip(&probs) {
                        acc += p;
                        if u < acc {
                            pick = *v;
                            break;
                        }
                    }
                    pick
                }
            };
            out.push(v);
        }
        Self::with_provenance(lattice, out, Provenance::Sampled { spec: spec.clone() })
    }

    /// Copy of the field with `J_e = 0` on every edge of `section`.
    pub fn force_dilution(&self, section: &[usize]) -> Result<Self> {
        let n = self.values.len();
        if let Some(e) = section.iter().find(|&&e| e >= n) {
            return Err(Error::Domain(format!("edge {e} is not in the box")));
        }
        let mut out = self.clone();
        for &e in section {
            out.values[e] = 0.0;
        }
        let mut s = section.to_vec();
        s.sort_unstable();
        s.dedup();
        out.dilutions.push(s);
        Ok(out)
    }

    /// Same as [`Self::force_dilution`] with the section given by endpoint
    /// pairs.
    pub fn force_dilution_points(&self, section: &[(Vec<i64>, Vec<i64>)]) -> Result<Self> {
        let mut ids = Vec::with_capacity(section.len());
        for (p, q) in section {
            let e = self.lattice.edge_between(p, q).ok_or_else(|| {
                Error::Domain(format!("edge {p:?}-{q:?} is not in the closed edge set"))
            })?;
            ids.push(e);
        }
        self.force_dilution(&ids)
    }

    pub fn lattice(&self) -> &Arc<LatticeBox> {
        &self.lattice
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, e: usize) -> f64 {
        self.values[e]
    }

    /// Replace a single coupling (used by monotonicity sweeps).
    pub fn with_value(&self, e: usize, value: f64) -> Result<Self> {
        check_unit(value)?;
        let mut out = self.clone();
        out.values[e] = value;
        out.provenance = Provenance::Explicit;
        Ok(out)
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn dilutions(&self) -> &[Vec<usize>] {
        &self.dilutions
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &v| m.max(v))
    }

    pub fn same_lattice(&self, other: &LatticeBox) -> bool {
        std::ptr::eq(self.lattice.as_ref(), other) || *self.lattice == *other
    }
}

fn check_unit(v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::Domain(format!("coupling {v} outside [0, 1]")))
    }
}
