use std::sync::Arc;

use rayon::prelude::*;

use super::disorder::CouplingField;
use super::lattice::LatticeBox;
use super::spins::{hamiltonian, Boundary, SpinConfig};
use crate::{Error, Result};

/// Default largest box (in sites) for exhaustive enumeration.
pub const DEFAULT_EXACT_CAP: usize = 20;

/// The finite-volume Gibbs measure `∝ exp(-(β/2) H)` tabulated over all
/// `2^|Λ|` configurations. State `s` encodes `σ_i = +1` iff bit `i` of `s`
/// is set.
#[derive(Clone, Debug)]
pub struct GibbsTable {
    lattice: Arc<LatticeBox>,
    boundary: Boundary,
    beta: f64,
    energies: Vec<f64>,
    probs: Vec<f64>,
}

impl GibbsTable {
    pub fn new(field: &CouplingField, beta: f64, boundary: Boundary) -> Result<Self> {
        Self::with_cap(field, beta, boundary, DEFAULT_EXACT_CAP)
    }

    pub fn with_cap(field: &CouplingField, beta: f64, boundary: Boundary, cap: usize) -> Result<Self> {
        let lattice = field.lattice().clone();
        let n = lattice.len();
        if n > cap || n >= 63 {
            return Err(Error::Capacity(format!(
                "exact enumeration of {n} sites exceeds the cap of {cap}"
            )));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::Domain(format!("inverse temperature {beta} must be finite and >= 0")));
        }
        // validate the boundary once
        SpinConfig::constant(lattice.clone(), 1, boundary.clone())?;
        let states = 1usize << n;
        let energies: Vec<f64> = (0..states)
            .into_par_iter()
            .map(|s| {
                let sigma = SpinConfig::from_bits(lattice.clone(), s as u64, boundary.clone())
                    .expect("validated");
                hamiltonian(field, &sigma).expect("same box")
            })
            .collect();
        let log_w: Vec<f64> = energies.iter().map(|h| -0.5 * beta * h).collect();
        let top = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut probs: Vec<f64> = log_w.iter().map(|l| (l - top).exp()).collect();
        let z: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= z);
        Ok(GibbsTable {
            lattice,
            boundary,
            beta,
            energies,
            probs,
        })
    }

    pub fn lattice(&self) -> &Arc<LatticeBox> {
        &self.lattice
    }

    pub fn boundary(&self) -> &Boundary {
        &self.boundary
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, state: u64) -> f64 {
        self.probs[state as usize]
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn config(&self, state: u64) -> SpinConfig {
        SpinConfig::from_bits(self.lattice.clone(), state, self.boundary.clone()).expect("in range")
    }

    /// `E_μ[f(state)]`.
    pub fn expect<F: Fn(u64) -> f64>(&self, f: F) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(s, p)| p * f(s as u64))
            .sum()
    }

    /// `E_μ[σ_i]`.
    pub fn mean_spin(&self, i: usize) -> f64 {
        self.expect(|s| if s >> i & 1 == 1 { 1.0 } else { -1.0 })
    }

    /// `E_μ[m_Λ]`.
    pub fn mean_magnetization(&self) -> f64 {
        let n = self.lattice.len() as f64;
        self.expect(|s| (2.0 * s.count_ones() as f64 - n) / n)
    }

    pub fn min_prob(&self) -> f64 {
        self.probs.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}
