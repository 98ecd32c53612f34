use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::disorder::CouplingField;
use super::lattice::{LatticeBox, Vertex};
use crate::{Error, Result};

/// Spins frozen outside the box.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Plus,
    Minus,
    /// One frozen spin per exterior vertex, in the box's exterior order.
    Frozen(Vec<i8>),
}

impl Boundary {
    pub fn spin(&self, exterior: usize) -> i8 {
        match self {
            Boundary::Plus => 1,
            Boundary::Minus => -1,
            Boundary::Frozen(s) => s[exterior],
        }
    }

    fn check(&self, lattice: &LatticeBox) -> Result<()> {
        if let Boundary::Frozen(s) = self {
            if s.len() != lattice.exterior().len() {
                return Err(Error::Domain(format!(
                    "frozen exterior has {} spins, box has {} exterior vertices",
                    s.len(),
                    lattice.exterior().len()
                )));
            }
            if s.iter().any(|&v| v != 1 && v != -1) {
                return Err(Error::Domain("exterior spins must be +1 or -1".into()));
            }
        }
        Ok(())
    }
}

/// `±1` spins on a box with a frozen exterior.
#[derive(Clone, Debug)]
pub struct SpinConfig {
    lattice: Arc<LatticeBox>,
    spins: Vec<i8>,
    boundary: Boundary,
}

impl PartialEq for SpinConfig {
    fn eq(&self, other: &Self) -> bool {
        self.spins == other.spins && self.boundary == other.boundary && *self.lattice == *other.lattice
    }
}

impl SpinConfig {
    pub fn new(lattice: Arc<LatticeBox>, spins: Vec<i8>, boundary: Boundary) -> Result<Self> {
        if spins.len() != lattice.len() {
            return Err(Error::Domain(format!(
                "{} spins for {} sites",
                spins.len(),
                lattice.len()
            )));
        }
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Domain("spins must be +1 or -1".into()));
        }
        boundary.check(&lattice)?;
        Ok(SpinConfig {
            lattice,
            spins,
            boundary,
        })
    }

    pub fn constant(lattice: Arc<LatticeBox>, spin: i8, boundary: Boundary) -> Result<Self> {
        let n = lattice.len();
        Self::new(lattice, vec![spin; n], boundary)
    }

    /// Configuration encoded by the low `|Λ|` bits of `bits`: bit `i` set
    /// means `σ_i = +1`.
    pub fn from_bits(lattice: Arc<LatticeBox>, bits: u64, boundary: Boundary) -> Result<Self> {
        let n = lattice.len();
        if n > 64 {
            return Err(Error::Capacity("bit encoding needs at most 64 sites".into()));
        }
        let spins = (0..n).map(|i| if bits >> i & 1 == 1 { 1 } else { -1 }).collect();
        Self::new(lattice, spins, boundary)
    }

    pub fn to_bits(&self) -> u64 {
        self.spins
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 1)
            .fold(0u64, |acc, (i, _)| acc | 1 << i)
    }

    pub fn lattice(&self) -> &Arc<LatticeBox> {
        &self.lattice
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn spin(&self, i: usize) -> i8 {
        self.spins[i]
    }

    pub fn boundary(&self) -> &Boundary {
        &self.boundary
    }

    /// Spin at any vertex touched by the closed edge set.
    pub fn spin_at(&self, v: Vertex) -> i8 {
        match v {
            Vertex::Site(i) => self.spins[i],
            Vertex::Exterior(j) => self.boundary.spin(j),
        }
    }

    pub fn set(&mut self, i: usize, s: i8) {
        debug_assert!(s == 1 || s == -1);
        self.spins[i] = s;
    }

    pub fn flip(&mut self, i: usize) {
        self.spins[i] = -self.spins[i];
    }

    /// The configuration `σ^x`.
    pub fn flipped(&self, i: usize) -> Self {
        let mut out = self.clone();
        out.flip(i);
        out
    }

    /// Sitewise order `self ≤ other`.
    pub fn le(&self, other: &SpinConfig) -> bool {
        self.spins.iter().zip(&other.spins).all(|(a, b)| a <= b)
    }

    /// `σ_x Σ_{y∼x} J_{xy} σ_y`, summed in canonical edge order so the value
    /// for `σ^x` is the exact negation.
    pub fn local_field(&self, field: &CouplingField, i: usize) -> f64 {
        let s = self.spins[i] as f64;
        let sum: f64 = self
            .lattice
            .neighbours(i)
            .iter()
            .map(|&(v, e)| field.get(e) * self.spin_at(v) as f64)
            .sum();
        s * sum
    }
}

/// `H^{J,ρ}_Λ(σ) = -Σ_{e={x,y} ∈ E^w(Λ)} J_e σ_x σ_y` for any frozen exterior.
pub fn hamiltonian(field: &CouplingField, sigma: &SpinConfig) -> Result<f64> {
    if !field.same_lattice(sigma.lattice()) {
        return Err(Error::Domain("coupling field and spins live on different boxes".into()));
    }
    let lattice = sigma.lattice();
    Ok(-lattice
        .edges()
        .iter()
        .enumerate()
        .map(|(e, edge)| field.get(e) * (sigma.spin_at(edge.a) * sigma.spin_at(edge.b)) as f64)
        .sum::<f64>())
}

/// Hamiltonian with plus boundary condition.
pub fn hamiltonian_plus(field: &CouplingField, sigma: &SpinConfig) -> Result<f64> {
    if *sigma.boundary() != Boundary::Plus {
        return Err(Error::Domain("configuration does not carry the plus boundary condition".into()));
    }
    hamiltonian(field, sigma)
}

/// `m_Λ = |Λ|^{-1} Σ_x σ_x`.
pub fn magnetization(sigma: &SpinConfig) -> f64 {
    let n = sigma.spins().len();
    sigma.spins().iter().map(|&s| s as f64).sum::<f64>() / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DisorderSpec;
    use proptest::prelude::*;

    fn single_site() -> (Arc<LatticeBox>, CouplingField) {
        let l = Arc::new(LatticeBox::symmetric(2, 0).unwrap());
        let f = CouplingField::uniform(l.clone(), 1.0).unwrap();
        (l, f)
    }

    #[test]
    fn single_site_energies() {
        let (l, f) = single_site();
        let up = SpinConfig::constant(l.clone(), 1, Boundary::Plus).unwrap();
        let down = SpinConfig::constant(l, -1, Boundary::Plus).unwrap();
        assert_eq!(hamiltonian_plus(&f, &up).unwrap(), -4.0);
        assert_eq!(hamiltonian_plus(&f, &down).unwrap(), 4.0);
        let minus_bc = SpinConfig::constant(down.lattice().clone(), -1, Boundary::Minus).unwrap();
        assert!(hamiltonian_plus(&f, &minus_bc).is_err());
    }

    #[test]
    fn mismatched_box_rejected() {
        let (_, f) = single_site();
        let other = Arc::new(LatticeBox::symmetric(2, 1).unwrap());
        let s = SpinConfig::constant(other, 1, Boundary::Plus).unwrap();
        assert!(matches!(hamiltonian(&f, &s), Err(Error::Domain(_))));
    }

    #[test]
    fn magnetization_values() {
        let l = Arc::new(LatticeBox::symmetric(2, 1).unwrap());
        let up = SpinConfig::constant(l.clone(), 1, Boundary::Plus).unwrap();
        assert_eq!(magnetization(&up), 1.0);
        let down = SpinConfig::constant(l.clone(), -1, Boundary::Plus).unwrap();
        assert_eq!(magnetization(&down), -1.0);
        let mixed = SpinConfig::new(l, vec![1, 1, 1, 1, 1, 1, -1, -1, -1], Boundary::Plus).unwrap();
        assert!((magnetization(&mixed) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn bits_roundtrip() {
        let l = Arc::new(LatticeBox::symmetric(2, 1).unwrap());
        for bits in [0u64, 1, 0b1010_1010, 511] {
            let s = SpinConfig::from_bits(l.clone(), bits, Boundary::Plus).unwrap();
            assert_eq!(s.to_bits(), bits);
        }
    }

    proptest! {
        #[test]
        fn energy_matches_resummation(seed in 0u64..1000, bits in 0u64..512) {
            let l = Arc::new(LatticeBox::symmetric(2, 1).unwrap());
            let spec = DisorderSpec { law: crate::model::CouplingLaw::Discrete {
                values: vec![0.0, 0.3, 1.0], probs: vec![0.2, 0.3, 0.5] }, seed };
            let f = CouplingField::sample(l.clone(), &spec).unwrap();
            let s = SpinConfig::from_bits(l.clone(), bits, Boundary::Plus).unwrap();
            // re-sum over nearest-neighbour pairs of the 5x5 window by coordinates
            let spin = |p: &[i64]| -> f64 {
                match l.site_index(p) { Some(i) => s.spin(i) as f64, None => 1.0 }
            };
            let mut h = 0.0;
            for x in -2..=2i64 { for y in -2..=2i64 {
                for q in [[x + 1, y], [x, y + 1]] {
                    let p = [x, y];
                    if let Some(e) = l.edge_between(&p, &q) {
                        h -= f.get(e) * spin(&p) * spin(&q);
                    }
                }
            }}
            prop_assert!((hamiltonian(&f, &s).unwrap() - h).abs() < 1e-12);
        }

        #[test]
        fn flip_energy_identity(seed in 0u64..1000, bits in 0u64..512, x in 0usize..9) {
            let l = Arc::new(LatticeBox::symmetric(2, 1).unwrap());
            let spec = DisorderSpec { law: crate::model::CouplingLaw::Discrete {
                values: vec![0.0, 0.5, 1.0], probs: vec![0.3, 0.3, 0.4] }, seed };
            let f = CouplingField::sample(l.clone(), &spec).unwrap();
            let s = SpinConfig::from_bits(l, bits, Boundary::Plus).unwrap();
            let dh = hamiltonian(&f, &s.flipped(x)).unwrap() - hamiltonian(&f, &s).unwrap();
            prop_assert!((dh - 2.0 * s.local_field(&f, x)).abs() < 1e-12);
        }
    }
}
