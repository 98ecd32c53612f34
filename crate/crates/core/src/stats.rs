//! Small statistical helpers shared by the estimators.

use statrs::distribution::{Beta, ChiSquared, ContinuousCDF};
use statrs::function::gamma::ln_gamma;

use crate::{Error, Result};

/// Sample mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

pub fn ln_poisson_pmf(k: u64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    k as f64 * lambda.ln() - lambda - ln_gamma(k as f64 + 1.0)
}

pub fn poisson_pmf(k: u64, lambda: f64) -> f64 {
    ln_poisson_pmf(k, lambda).exp()
}

/// Total-variation distance `½ Σ |p - q|` between two vectors of equal
/// length.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len());
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// TV distance between the empirical law of `samples` and Poisson(`lambda`).
/// The Poisson tail beyond the largest sample is counted in full.
pub fn poisson_tv(samples: &[u64], lambda: f64) -> f64 {
    let n = samples.len() as f64;
    let kmax = samples.iter().copied().max().unwrap_or(0);
    let mut counts = vec![0usize; kmax as usize + 1];
    for &k in samples {
        counts[k as usize] += 1;
    }
    let mut tv = 0.0;
    let mut mass = 0.0;
    for (k, &c) in counts.iter().enumerate() {
        let p = poisson_pmf(k as u64, lambda);
        mass += p;
        tv += (c as f64 / n - p).abs();
    }
    tv += (1.0 - mass).max(0.0);
    0.5 * tv
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson goodness of fit of `observed` counts to `probs`. Cells with
/// expected count below `min_expected` are pooled into one.
pub fn chi_square_gof(observed: &[u64], probs: &[f64], min_expected: f64) -> Result<ChiSquareTest> {
    if observed.len() != probs.len() {
        return Err(Error::Domain("observed and expected cells differ in number".into()));
    }
    let n: f64 = observed.iter().map(|&c| c as f64).sum();
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pool = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        let e = n * p;
        if e < min_expected {
            pool.0 += o as f64;
            pool.1 += e;
        } else {
            cells.push((o as f64, e));
        }
    }
    if pool.1 > 0.0 {
        cells.push(pool);
    }
    if cells.len() < 2 {
        return Err(Error::Statistical("fewer than two usable cells".into()));
    }
    let statistic = cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = cells.len() - 1;
    let chi = ChiSquared::new(dof as f64).map_err(|e| Error::Numerical(e.to_string()))?;
    Ok(ChiSquareTest {
        statistic,
        dof,
        p_value: 1.0 - chi.cdf(statistic),
    })
}

/// Two-sided Clopper–Pearson interval for a binomial proportion at
/// confidence `1 - alpha`.
pub fn clopper_pearson(k: u64, n: u64, alpha: f64) -> Result<(f64, f64)> {
    if n == 0 || k > n {
        return Err(Error::Domain(format!("invalid binomial count {k}/{n}")));
    }
    let (kf, nf) = (k as f64, n as f64);
    let q = |a: f64, b: f64, p: f64| -> Result<f64> {
        Ok(Beta::new(a, b).map_err(|e| Error::Numerical(e.to_string()))?.inverse_cdf(p))
    };
    let lo = if k == 0 { 0.0 } else { q(kf, nf - kf + 1.0, alpha / 2.0)? };
    let hi = if k == n { 1.0 } else { q(kf + 1.0, nf - kf, 1.0 - alpha / 2.0)? };
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clopper_pearson_zero_successes() {
        // with k = 0 the upper bound solves (1-p)^n = alpha/2
        let (lo, hi) = clopper_pearson(0, 100, 0.05).unwrap();
        assert_eq!(lo, 0.0);
        assert!((hi - (1.0 - 0.025f64.powf(0.01))).abs() < 1e-9);
        let (lo, hi) = clopper_pearson(50, 100, 0.05).unwrap();
        assert!(lo < 0.5 && hi > 0.5 && (0.5 - lo - (hi - 0.5)).abs() < 1e-9);
    }

    #[test]
    fn poisson_pmf_sums_to_one() {
        let s: f64 = (0..60).map(|k| poisson_pmf(k, 7.5)).sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert_eq!(poisson_pmf(0, 0.0), 1.0);
    }

    #[test]
    fn tv_and_mean() {
        assert_eq!(total_variation(&[0.5, 0.5], &[1.0, 0.0]), 0.5);
        let (m, se) = mean_se(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((se - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(poisson_tv(&[0, 0, 0], 0.0) < 1e-15);
    }

    #[test]
    fn chi_square_accepts_exact_fit() {
        let t = chi_square_gof(&[25, 25, 50], &[0.25, 0.25, 0.5], 5.0).unwrap();
        assert_eq!(t.statistic, 0.0);
        assert!((t.p_value - 1.0).abs() < 1e-12);
    }
}
