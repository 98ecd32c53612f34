use nalgebra::DMatrix;

use super::generator::ExactGenerator;
use crate::stats::ln_poisson_pmf;
use crate::{Error, Result};

const TAIL: f64 = 1e-14;
/// Largest box (in sites) for mixing-time computation.
pub const MIXING_CAP: usize = 12;

fn poisson_weights(a: f64) -> Vec<f64> {
    // weights until the remaining mass is below TAIL and past the mode
    let mut w = Vec::new();
    let mut acc = 0.0;
    let mut k = 0u64;
    loop {
        let p = ln_poisson_pmf(k, a).exp();
        w.push(p);
        acc += p;
        if k as f64 > a && 1.0 - acc < TAIL {
            break;
        }
        if k as f64 > a + 40.0 * a.sqrt() + 60.0 {
            break;
        }
        k += 1;
    }
    w
}

impl ExactGenerator {
    /// `T(t) f = e^{tL} f` by uniformization: `Σ_k Pois(Λt; k) K^k f` with
    /// `K = I + L/Λ`, truncated once the Poisson tail is below `1e-14`.
    pub fn semigroup(&self, f: &[f64], t: f64) -> Result<Vec<f64>> {
        self.uniformize(f, t, false)
    }

    /// `ν T(t)` for a row vector (distribution) `ν`.
    pub fn evolve_distribution(&self, nu: &[f64], t: f64) -> Result<Vec<f64>> {
        self.uniformize(nu, t, true)
    }

    fn uniformize(&self, v0: &[f64], t: f64, transpose: bool) -> Result<Vec<f64>> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("time {t} must be finite and nonnegative")));
        }
        if v0.len() != self.states() {
            return Err(Error::Contract(format!("vector of length {} for {} states", v0.len(), self.states())));
        }
        let lam = self.exit_max();
        if t == 0.0 || lam == 0.0 {
            return Ok(v0.to_vec());
        }
        let weights = poisson_weights(lam * t);
        let mut v = v0.to_vec();
        let mut out = vec![0.0; v.len()];
        for (k, w) in weights.iter().enumerate() {
            if k > 0 {
                let lv = if transpose { self.apply_transpose(&v) } else { self.apply(&v) };
                v.iter_mut().zip(&lv).for_each(|(a, b)| *a += b / lam);
            }
            out.iter_mut().zip(&v).for_each(|(o, x)| *o += w * x);
        }
        Ok(out)
    }

    /// `P_t = D^{-1/2} V e^{-tΛ} V^T D^{1/2}` from the dense eigensystem.
    pub fn transition_matrix(&self, t: f64) -> Result<DMatrix<f64>> {
        let (vals, vecs) = self.eigen()?;
        Ok(self.transition_from(&vals, &vecs, t))
    }

    fn transition_from(&self, vals: &[f64], vecs: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
        let m = self.states();
        let mut scaled = vecs.clone();
        for (c, &l) in vals.iter().enumerate() {
            let e = (-t * l.max(0.0)).exp();
            scaled.column_mut(c).scale_mut(e);
        }
        let mut p = scaled * vecs.transpose();
        let sq: Vec<f64> = self.mu().iter().map(|p| p.sqrt()).collect();
        for r in 0..m {
            for c in 0..m {
                p[(r, c)] *= sq[c] / sq[r];
            }
        }
        p
    }

    fn worst_tv(&self, vals: &[f64], vecs: &DMatrix<f64>, t: f64) -> f64 {
        let p = self.transition_from(vals, vecs, t);
        let mu = self.mu();
        (0..self.states())
            .map(|r| 0.5 * (0..self.states()).map(|c| (p[(r, c)] - mu[c]).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `max_σ ‖P_t(σ, ·) − μ‖_TV`.
    pub fn worst_case_tv(&self, t: f64) -> Result<f64> {
        self.check_mixing_cap()?;
        let (vals, vecs) = self.eigen()?;
        Ok(self.worst_tv(&vals, &vecs, t))
    }

    fn check_mixing_cap(&self) -> Result<()> {
        if self.sites() > MIXING_CAP {
            return Err(Error::Capacity(format!("{} sites exceed the mixing-time cap of {MIXING_CAP}", self.sites())));
        }
        Ok(())
    }

    /// First `t` with worst-start total variation at most `e^{-1}`, located
    /// by doubling and then bisection to `1e-6`. Returns the upper end of
    /// the final bracket.
    pub fn mixing_time(&self) -> Result<f64> {
        self.check_mixing_cap()?;
        let (vals, vecs) = self.eigen()?;
        let target = (-1.0f64).exp();
        let d = |t: f64| self.worst_tv(&vals, &vecs, t);
        if d(0.0) <= target {
            return Ok(0.0);
        }
        let mut lo = 0.0;
        let mut hi = 1.0 / self.exit_max().max(1e-300);
        let mut guard = 0;
        while d(hi) > target {
            lo = hi;
            hi *= 2.0;
            guard += 1;
            if guard > 200 {
                return Err(Error::Numerical("worst-case distance does not decay".into()));
            }
        }
        while hi - lo > 1e-7 {
            let mid = 0.5 * (lo + hi);
            if d(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::dynamics::RateModel;
    use crate::model::{Boundary, CouplingField, DisorderSpec, LatticeBox};

    fn gen(ranges: &[(i64, i64)], seed: u64, beta: f64) -> ExactGenerator {
        let l = Arc::new(LatticeBox::from_ranges(ranges).unwrap());
        let f = CouplingField::sample(l, &DisorderSpec::bernoulli(0.3, seed)).unwrap();
        ExactGenerator::new(&f, &RateModel::heat_bath(beta), Boundary::Plus).unwrap()
    }

    #[test]
    fn uniformization_matches_eigen_route() {
        let g = gen(&[(0, 1), (0, 1)], 2, 0.8);
        let f = g.spin_function(0);
        for t in [0.0, 0.3, 2.0, 7.5] {
            let a = g.semigroup(&f, t).unwrap();
            let p = g.transition_matrix(t).unwrap();
            for s in 0..g.states() {
                let b: f64 = (0..g.states()).map(|c| p[(s, c)] * f[c]).sum();
                assert!((a[s] - b).abs() < 1e-10, "t={t}: {} vs {b}", a[s]);
            }
        }
    }

    #[test]
    fn distributions_converge_to_mu() {
        let g = gen(&[(0, 2), (0, 0)], 5, 0.5);
        let mut nu = vec![0.0; g.states()];
        nu[0] = 1.0;
        let out = g.evolve_distribution(&nu, 60.0).unwrap();
        assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (a, b) in out.iter().zip(g.mu()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn two_state_mixing_closed_form() {
        let l = Arc::new(LatticeBox::symmetric(2, 0).unwrap());
        let f = CouplingField::uniform(l, 1.0).unwrap();
        let g = ExactGenerator::new(&f, &RateModel::heat_bath(0.0), Boundary::Plus).unwrap();
        let tm = g.mixing_time().unwrap();
        assert!((tm - (1.0 - 2f64.ln())).abs() < 1e-6);
        for t in [0.0, 0.5, 2.0] {
            assert!((g.worst_case_tv(t).unwrap() - 0.5 * (-t).exp()).abs() < 1e-13);
        }
    }
}
