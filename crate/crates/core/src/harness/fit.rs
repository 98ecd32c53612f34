use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dynamics::{AutocorrelationCurve, CurvePoint};
use crate::seeding;
use crate::{Error, Result};

/// Fits with `R²` below this are flagged.
pub const R2_THRESHOLD: f64 = 0.98;
pub const MIN_POINTS: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    /// Slope of `log A` against `log t`.
    pub exponent: f64,
    /// `log A` at `t = 1`.
    pub intercept: f64,
    pub window: (f64, f64),
    pub points: usize,
    pub r2: f64,
    pub poor_fit: bool,
    /// 95% percentile interval of the exponent; widened if necessary to
    /// contain the point estimate.
    pub ci: (f64, f64),
    /// Bootstrap resamples that produced a valid fit.
    pub resamples: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bootstrap {
    pub resamples: usize,
    pub seed: u64,
}

impl Default for Bootstrap {
    fn default() -> Self {
        Bootstrap { resamples: 1000, seed: 0 }
    }
}

/// Ordinary least squares `y = a + b x`: `(b, a, R²)`. A perfect fit,
/// including a constant `y`, has `R² = 1`.
fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(u, v)| (v - a - b * u).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let r2 = if ss_res <= 1e-28 * n || ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    (b, a, r2)
}

/// Power-law fit of the curve's points with `t` in `window`.
pub fn fit_power_law(curve: &AutocorrelationCurve, window: (f64, f64)) -> Result<PowerLawFit> {
    fit_power_law_with(&curve.points, window, &Bootstrap::default())
}

/// Least squares on `(log t, log A)` over the points with `t ∈ window`.
/// The interval is a parametric bootstrap: each point is redrawn as
/// `A + stderr · Z` and the fit repeated; resamples with a nonpositive
/// value are discarded.
pub fn fit_power_law_with(points: &[CurvePoint], window: (f64, f64), boot: &Bootstrap) -> Result<PowerLawFit> {
    let (lo, hi) = window;
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(Error::Domain(format!("fit window ({lo}, {hi}) must satisfy 0 < lo < hi < ∞")));
    }
    let t_min = points.iter().map(|p| p.t).fold(f64::INFINITY, f64::min);
    let t_max = points.iter().map(|p| p.t).fold(f64::NEG_INFINITY, f64::max);
    if !(t_min <= lo && hi <= t_max) {
        return Err(Error::Domain(format!("fit window ({lo}, {hi}) outside the data range [{t_min}, {t_max}]")));
    }
    let sel: Vec<&CurvePoint> = points.iter().filter(|p| p.t >= lo && p.t <= hi).collect();
    if let Some(p) = sel.iter().find(|p| !(p.estimate > 0.0 && p.estimate.is_finite())) {
        return Err(Error::Domain(format!("fit window contains the nonpositive value {} at t = {}", p.estimate, p.t)));
    }
    if sel.len() < MIN_POINTS {
        return Err(Error::Statistical(format!("{} points in the fit window, need {MIN_POINTS}", sel.len())));
    }
    let x: Vec<f64> = sel.iter().map(|p| p.t.ln()).collect();
    let y: Vec<f64> = sel.iter().map(|p| p.estimate.ln()).collect();
    let (exponent, intercept, r2) = least_squares(&x, &y);

    let mut rng = seeding::stream(boot.seed, "bootstrap", 0);
    let mut slopes = Vec::with_capacity(boot.resamples);
    let mut yb = vec![0.0; y.len()];
    'resample: for _ in 0..boot.resamples {
        for (k, p) in sel.iter().enumerate() {
            let z: f64 = StandardNormal.sample(&mut rng);
            let a = p.estimate + p.stderr.max(0.0) * z;
            if a <= 0.0 {
                continue 'resample;
            }
            yb[k] = a.ln();
        }
        slopes.push(least_squares(&x, &yb).0);
    }
    slopes.sort_by(f64::total_cmp);
    let ci = if slopes.is_empty() {
        (exponent, exponent)
    } else {
        let q = |p: f64| slopes[((p * (slopes.len() - 1) as f64).round() as usize).min(slopes.len() - 1)];
        (q(0.025).min(exponent), q(0.975).max(exponent))
    };
    Ok(PowerLawFit {
        exponent,
        intercept,
        window,
        points: sel.len(),
        r2,
        poor_fit: r2 < R2_THRESHOLD,
        ci,
        resamples: slopes.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(f: impl Fn(f64) -> f64, ts: &[f64], se: f64) -> Vec<CurvePoint> {
        ts.iter().map(|&t| CurvePoint { t, estimate: f(t), stderr: se * f(t), replicas: 1 }).collect()
    }

    fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        let mut v: Vec<f64> = (0..n).map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (n - 1) as f64).exp()).collect();
        v[n - 1] = b;
        v
    }

    #[test]
    fn planted_exponents() {
        let ts = logspace(1.0, 1000.0, 20);
        let fit = fit_power_law_with(&curve(|t| 3.0 * t.powf(-2.0), &ts, 0.0), (1.0, 1000.0), &Bootstrap::default()).unwrap();
        assert!((fit.exponent + 2.0).abs() < 1e-9 && (fit.intercept - 3f64.ln()).abs() < 1e-9);
        assert!(!fit.poor_fit && fit.ci == (fit.exponent, fit.exponent));
        let flat = fit_power_law_with(&curve(|_| 0.7, &ts, 0.0), (2.0, 500.0), &Bootstrap::default()).unwrap();
        assert!(flat.exponent.abs() < 1e-12 && flat.r2 == 1.0);
        let noisy = fit_power_law_with(&curve(|t| t.powf(-0.5), &ts, 0.05), (1.0, 1000.0), &Bootstrap::default()).unwrap();
        assert!(noisy.ci.0 <= noisy.exponent && noisy.exponent <= noisy.ci.1 && noisy.ci.0 < noisy.ci.1);
    }

    #[test]
    fn exponential_decay_is_flagged() {
        let ts = logspace(0.5, 20.0, 15);
        let fit = fit_power_law_with(&curve(|t| (-t).exp(), &ts, 0.0), (0.5, 20.0), &Bootstrap::default()).unwrap();
        assert!(fit.poor_fit, "{}", fit.r2);
    }

    #[test]
    fn window_errors() {
        let ts = logspace(1.0, 10.0, 8);
        let pts = curve(|t| 1.0 / t, &ts, 0.0);
        let b = Bootstrap::default();
        assert!(matches!(fit_power_law_with(&pts, (0.5, 10.0), &b), Err(Error::Domain(_))));
        assert!(matches!(fit_power_law_with(&pts, (1.0, 2.0), &b), Err(Error::Statistical(_))));
        let mut bad = pts.clone();
        bad[3].estimate = 0.0;
        assert!(matches!(fit_power_law_with(&bad, (1.0, 10.0), &b), Err(Error::Domain(_))));
    }
}
