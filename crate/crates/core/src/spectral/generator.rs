use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use crate::dynamics::RateModel;
use crate::model::{Boundary, CouplingField, GibbsTable, LatticeBox};
use crate::seeding;
use crate::{Error, Result};

/// Default largest box (in sites) for generator construction.
pub const GENERATOR_CAP: usize = 14;
/// Largest state space handed to the dense eigensolver.
pub const DENSE_CAP: usize = 1 << 12;
/// Up to this many states the gap is computed both densely and by Lanczos.
pub const CROSS_CHECK_CAP: usize = 1 << 10;

/// The generator `(L f)(σ) = Σ_x c(x,σ) (f(σ^x) − f(σ))` on all `2^|Λ|`
/// configurations (state `s` has `σ_i = +1` iff bit `i` is set), with its
/// stationary law.
#[derive(Clone, Debug)]
pub struct ExactGenerator {
    lattice: Arc<LatticeBox>,
    sites: usize,
    mu: Vec<f64>,
    /// `rates[s * sites + x] = c(x, σ_s)`.
    rates: Vec<f64>,
    exit_max: f64,
}

impl ExactGenerator {
    pub fn new(field: &CouplingField, model: &RateModel, boundary: Boundary) -> Result<Self> {
        Self::with_cap(field, model, boundary, GENERATOR_CAP)
    }

    pub fn with_cap(field: &CouplingField, model: &RateModel, boundary: Boundary, cap: usize) -> Result<Self> {
        model.validate()?;
        let n = field.lattice().len();
        if n > cap {
            return Err(Error::Capacity(format!("{n} sites exceed the generator cap of {cap}")));
        }
        let table = GibbsTable::with_cap(field, model.beta, boundary, cap)?;
        let states = table.len();
        let mut rates = vec![0.0; states * n];
        let mut exit_max = 0.0f64;
        for s in 0..states {
            let sigma = table.config(s as u64);
            let mut exit = 0.0;
            for x in 0..n {
                let c = model.rate(field, &sigma, x);
                if !(c.is_finite() && c >= 0.0) {
                    return Err(Error::Model(format!("rate {c} at state {s}, site {x}")));
                }
                rates[s * n + x] = c;
                exit += c;
            }
            exit_max = exit_max.max(exit);
        }
        Ok(ExactGenerator { lattice: field.lattice().clone(), sites: n, mu: table.probs().to_vec(), rates, exit_max })
    }

    pub fn lattice(&self) -> &Arc<LatticeBox> {
        &self.lattice
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn states(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn rate(&self, s: usize, x: usize) -> f64 {
        self.rates[s * self.sites + x]
    }

    /// Largest total exit rate, the uniformization constant.
    pub fn exit_max(&self) -> f64 {
        self.exit_max
    }

    /// `L f`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let n = self.sites;
        (0..self.states())
            .map(|s| (0..n).map(|x| self.rate(s, x) * (f[s ^ (1 << x)] - f[s])).sum())
            .collect()
    }

    /// `ν L` for a row vector `ν`.
    pub fn apply_transpose(&self, nu: &[f64]) -> Vec<f64> {
        let n = self.sites;
        (0..self.states())
            .map(|s| {
                (0..n)
                    .map(|x| {
                        let t = s ^ (1 << x);
                        nu[t] * self.rate(t, x) - nu[s] * self.rate(s, x)
                    })
                    .sum()
            })
            .collect()
    }

    /// Dense rate matrix.
    pub fn dense(&self) -> Result<DMatrix<f64>> {
        let m = self.states();
        if m > DENSE_CAP {
            return Err(Error::Capacity(format!("{m} states exceed the dense cap of {DENSE_CAP}")));
        }
        let mut l = DMatrix::zeros(m, m);
        for s in 0..m {
            for x in 0..self.sites {
                let c = self.rate(s, x);
                l[(s, s ^ (1 << x))] += c;
                l[(s, s)] -= c;
            }
        }
        Ok(l)
    }

    /// `-D^{1/2} L D^{-1/2}`, written as `-sqrt(c(σ→η) c(η→σ))` off the
    /// diagonal so it is symmetric to the last bit for reversible chains.
    pub fn symmetrized(&self) -> Result<DMatrix<f64>> {
        let m = self.states();
        if m > DENSE_CAP {
            return Err(Error::Capacity(format!("{m} states exceed the dense cap of {DENSE_CAP}")));
        }
        let mut s_mat = DMatrix::zeros(m, m);
        for s in 0..m {
            for x in 0..self.sites {
                let t = s ^ (1 << x);
                s_mat[(s, t)] = -(self.rate(s, x) * self.rate(t, x)).sqrt();
                s_mat[(s, s)] += self.rate(s, x);
            }
        }
        Ok(s_mat)
    }

    fn apply_symmetrized(&self, v: &[f64]) -> Vec<f64> {
        let n = self.sites;
        (0..self.states())
            .map(|s| {
                (0..n)
                    .map(|x| {
                        let t = s ^ (1 << x);
                        let c = self.rate(s, x);
                        c * v[s] - (c * self.rate(t, x)).sqrt() * v[t]
                    })
                    .sum()
            })
            .collect()
    }

    pub fn mean(&self, f: &[f64]) -> f64 {
        self.mu.iter().zip(f).map(|(p, v)| p * v).sum()
    }

    pub fn variance(&self, f: &[f64]) -> f64 {
        let m = self.mean(f);
        self.mu.iter().zip(f).map(|(p, v)| p * (v - m).powi(2)).sum()
    }

    /// `E(f,f) = ½ Σ_{σ,x} μ(σ) c(x,σ) (f(σ^x) − f(σ))²`.
    pub fn dirichlet(&self, f: &[f64]) -> f64 {
        let n = self.sites;
        0.5 * (0..self.states())
            .map(|s| {
                (0..n).map(|x| self.mu[s] * self.rate(s, x) * (f[s ^ (1 << x)] - f[s]).powi(2)).sum::<f64>()
            })
            .sum::<f64>()
    }

    /// Largest `|Σ_σ L[σ,η]|` row sum (exactly zero by construction) and
    /// largest `|(μL)(η)|`.
    pub fn stationarity_defect(&self) -> f64 {
        self.apply_transpose(&self.mu).iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn row_sum_defect(&self) -> f64 {
        let ones = vec![1.0; self.states()];
        self.apply(&ones).iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest relative violation of `μ(σ) L[σ,η] = μ(η) L[η,σ]`.
    pub fn reversibility_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for s in 0..self.states() {
            for x in 0..self.sites {
                let t = s ^ (1 << x);
                let a = self.mu[s] * self.rate(s, x);
                let b = self.mu[t] * self.rate(t, x);
                let scale = a.abs().max(b.abs());
                if scale > 0.0 {
                    worst = worst.max((a - b).abs() / scale);
                }
            }
        }
        worst
    }

    /// Spectrum of the symmetrized `-L`, ascending, with eigenvectors.
    pub fn eigen(&self) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let eig = SymmetricEigen::new(self.symmetrized()?);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vecs = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
        Ok((vals, vecs))
    }

    /// Second-smallest eigenvalue of the symmetrized `-L` by dense
    /// diagonalization.
    pub fn gap_eigen(&self) -> Result<f64> {
        let (vals, _) = self.eigen()?;
        if vals.len() < 2 {
            return Err(Error::Numerical("a one-state chain has no gap".into()));
        }
        Ok(vals[1])
    }

    /// Variational gap `inf E(f,f)/Var(f)`: Lanczos with full
    /// reorthogonalization on the complement of the constants, in `L²(μ)`
    /// coordinates. Returns the Rayleigh quotient of the minimizing Ritz
    /// function evaluated through the Dirichlet form.
    pub fn gap_variational(&self) -> Result<f64> {
        let m = self.states();
        if m < 2 {
            return Err(Error::Numerical("a one-state chain has no gap".into()));
        }
        let phi0: Vec<f64> = self.mu.iter().map(|p| p.sqrt()).collect();
        let project = |v: &mut Vec<f64>, basis: &[Vec<f64>]| {
            for _ in 0..2 {
                for b in std::iter::once(&phi0).chain(basis.iter()) {
                    let c: f64 = v.iter().zip(b).map(|(a, b)| a * b).sum();
                    v.iter_mut().zip(b).for_each(|(a, b)| *a -= c * b);
                }
            }
        };
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut rng = seeding::stream(0x5eed, "lanczos", m as u64);
        let mut v: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() - 0.5).collect();
        project(&mut v, &[]);
        let nv = norm(&v);
        v.iter_mut().for_each(|x| *x /= nv);
        let kmax = m - 1;
        let mut basis: Vec<Vec<f64>> = vec![v];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let best = loop {
            let k = basis.len();
            let mut w = self.apply_symmetrized(&basis[k - 1]);
            let a: f64 = w.iter().zip(&basis[k - 1]).map(|(x, y)| x * y).sum();
            alpha.push(a);
            project(&mut w, &basis);
            let b = norm(&w);
            // Ritz values of the current tridiagonal matrix
            let t = DMatrix::from_fn(k, k, |i, j| {
                if i == j {
                    alpha[i]
                } else if i + 1 == j {
                    beta[i]
                } else if j + 1 == i {
                    beta[j]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(t);
            let (imin, &theta) = eig
                .eigenvalues
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .expect("nonempty");
            let resid = (b * eig.eigenvectors[(k - 1, imin)]).abs();
            let coeffs: Vec<f64> = (0..k).map(|i| eig.eigenvectors[(i, imin)]).collect();
            if k >= kmax || b < 1e-14 * theta.abs().max(1.0) || resid < 1e-13 * theta.abs().max(1e-300) {
                break (theta, coeffs);
            }
            beta.push(b);
            w.iter_mut().for_each(|x| *x /= b);
            basis.push(w);
        };
        // Ritz vector back to a function: f = D^{-1/2} y
        let mut y = vec![0.0; m];
        for (c, b) in best.1.iter().zip(&basis) {
            y.iter_mut().zip(b).for_each(|(a, v)| *a += c * v);
        }
        let f: Vec<f64> = y.iter().zip(&self.mu).map(|(v, p)| v / p.sqrt()).collect();
        let var = self.variance(&f);
        if !(var > 0.0) {
            return Err(Error::Numerical("variational minimizer has zero variance".into()));
        }
        Ok(self.dirichlet(&f) / var)
    }

    /// Gap from both routes; they must agree to `1e-9` (relative to the
    /// gap's scale). Above [`CROSS_CHECK_CAP`] states only Lanczos runs.
    pub fn spectral_gap(&self) -> Result<GapResult> {
        let variational = self.gap_variational()?;
        let eigen = if self.states() <= CROSS_CHECK_CAP { Some(self.gap_eigen()?) } else { None };
        if let Some(e) = eigen {
            if (e - variational).abs() > 1e-9 * e.abs().max(1.0) {
                return Err(Error::Numerical(format!("eigen gap {e} and variational gap {variational} disagree")));
            }
        }
        let gap = eigen.unwrap_or(variational);
        if !(gap > 0.0) {
            return Err(Error::Numerical(format!("non-positive gap {gap}: chain is reducible")));
        }
        Ok(GapResult { gap, eigen, variational })
    }

    pub fn relaxation_time(&self) -> Result<f64> {
        Ok(1.0 / self.spectral_gap()?.gap)
    }

    /// State index of the configuration with all spins equal to `s`.
    pub fn constant_state(&self, s: i8) -> usize {
        if s == 1 {
            self.states() - 1
        } else {
            0
        }
    }

    /// `π_i` as a function on states.
    pub fn spin_function(&self, i: usize) -> Vec<f64> {
        (0..self.states()).map(|s| if s >> i & 1 == 1 { 1.0 } else { -1.0 }).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapResult {
    pub gap: f64,
    pub eigen: Option<f64>,
    pub variational: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(j: f64) -> CouplingField {
        CouplingField::uniform(Arc::new(LatticeBox::symmetric(2, 0).unwrap()), j).unwrap()
    }

    #[test]
    fn two_state_chains() {
        let g = ExactGenerator::new(&single(1.0), &RateModel::heat_bath(0.7), Boundary::Plus).unwrap();
        let l = g.dense().unwrap();
        assert!((l[(0, 1)] + l[(1, 0)] - 1.0).abs() < 1e-15);
        let gap = g.spectral_gap().unwrap();
        assert!((gap.gap - 1.0).abs() < 1e-14);
        // zero local field for Metropolis: both rates 1
        let g = ExactGenerator::new(&single(0.0), &RateModel::metropolis(0.7), Boundary::Plus).unwrap();
        assert!((g.spectral_gap().unwrap().gap - 2.0).abs() < 1e-14);
    }

    #[test]
    fn generator_invariants() {
        let l = Arc::new(LatticeBox::from_ranges(&[(0, 1), (0, 1)]).unwrap());
        let f = CouplingField::sample(l, &crate::model::DisorderSpec::bernoulli(0.3, 4)).unwrap();
        for m in [RateModel::heat_bath(0.9), RateModel::metropolis(0.9)] {
            let g = ExactGenerator::new(&f, &m, Boundary::Plus).unwrap();
            assert_eq!(g.row_sum_defect(), 0.0);
            assert!(g.stationarity_defect() < 1e-12);
            assert!(g.reversibility_defect() < 1e-12);
            let (vals, _) = g.eigen().unwrap();
            assert!(vals[0].abs() < 1e-12 && vals[1] > 1e-6);
            let r = g.spectral_gap().unwrap();
            assert!((r.eigen.unwrap() - r.variational).abs() < 1e-9);
        }
    }

    #[test]
    fn infinite_temperature_structure() {
        let l = Arc::new(LatticeBox::from_ranges(&[(0, 1), (0, 0)]).unwrap());
        let f = CouplingField::uniform(l, 1.0).unwrap();
        let g = ExactGenerator::new(&f, &RateModel::heat_bath(0.0), Boundary::Plus).unwrap();
        let l = g.dense().unwrap();
        for s in 0..4usize {
            for t in 0..4usize {
                let want = if s == t { -1.0 } else if (s ^ t).count_ones() == 1 { 0.5 } else { 0.0 };
                assert_eq!(l[(s, t)], want);
            }
        }
        assert!(g.mu().iter().all(|&p| (p - 0.25).abs() < 1e-15));
    }
}
