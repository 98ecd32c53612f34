use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rates::RateModel;
use super::sim::{clock_for, evolve, DynamicsSeed, Trajectory};
use crate::model::{profile_mk, Boundary, CouplingField, GibbsTable, SpinConfig};
use crate::seeding;
use crate::stats::{ln_poisson_pmf, mean_se};
use crate::{Error, Result};

/// Monte Carlo estimate of `[T(t) f](σ0) = E_σ0 f(σ(t))` with its standard
/// error. Replica `r` uses the stream keyed by `(seed, r)`.
pub fn estimate_semigroup<F>(
    field: &CouplingField,
    model: &RateModel,
    f: F,
    sigma0: &SpinConfig,
    t: f64,
    replicas: usize,
    seed: u64,
) -> Result<(f64, f64)>
where
    F: Fn(&SpinConfig) -> f64 + Sync,
{
    if replicas < 2 {
        return Err(Error::Statistical("need at least two replicas".into()));
    }
    if !field.same_lattice(sigma0.lattice()) {
        return Err(Error::Domain("field and configuration live on different boxes".into()));
    }
    if t == 0.0 {
        return Ok((f(sigma0), 0.0));
    }
    let clock = clock_for(model, field)?;
    let xs: Vec<f64> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = DynamicsSeed::new(seed, r).stream();
            let mut s = sigma0.clone();
            evolve(field, model, &mut s, t, clock, &mut rng);
            f(&s)
        })
        .collect();
    let (m, se) = mean_se(&xs);
    // exact zero when every replica agrees
    let se = if xs.iter().all(|&x| x == xs[0]) { 0.0 } else { se };
    Ok((m, se))
}

/// How starting configurations `ρ ~ μ^{J,+}` are drawn.
#[derive(Clone, Debug)]
pub enum EquilibriumSampler {
    /// Inverse-CDF draw from the exact Gibbs table.
    Exact { cdf: Vec<f64>, table: GibbsTable },
    /// Heat-bath run from all-plus for `burn_in` time units.
    BurnIn { burn_in: f64 },
}

impl EquilibriumSampler {
    /// Exact when the box has at most `cap` sites, otherwise a burn-in of
    /// the given length.
    pub fn for_field(field: &CouplingField, beta: f64, cap: usize, burn_in: f64) -> Result<Self> {
        if field.lattice().len() <= cap {
            let table = GibbsTable::with_cap(field, beta, Boundary::Plus, cap)?;
            let mut acc = 0.0;
            let cdf = table.probs().iter().map(|p| {
                acc += p;
                acc
            }).collect();
            Ok(EquilibriumSampler::Exact { cdf, table })
        } else {
            if !(burn_in >= 0.0 && burn_in.is_finite()) {
                return Err(Error::Domain(format!("burn-in {burn_in} must be finite and >= 0")));
            }
            Ok(EquilibriumSampler::BurnIn { burn_in })
        }
    }

    pub fn burn_in(&self) -> Option<f64> {
        match self {
            EquilibriumSampler::Exact { .. } => None,
            EquilibriumSampler::BurnIn { burn_in } => Some(*burn_in),
        }
    }

    pub fn sample(&self, field: &CouplingField, beta: f64, rng: &mut impl Rng) -> Result<SpinConfig> {
        match self {
            EquilibriumSampler::Exact { cdf, table } => {
                let u: f64 = rng.gen::<f64>() * cdf[cdf.len() - 1];
                let s = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
                Ok(table.config(s as u64))
            }
            EquilibriumSampler::BurnIn { burn_in } => {
                let mut s = SpinConfig::constant(field.lattice().clone(), 1, Boundary::Plus)?;
                let hb = RateModel::heat_bath(beta);
                let clock = clock_for(&hb, field)?;
                evolve(field, &hb, &mut s, *burn_in, clock, rng);
                Ok(s)
            }
        }
    }

    /// `μ(σ_0)` when it is known exactly.
    pub fn exact_origin_mean(&self, origin: usize) -> Option<f64> {
        match self {
            EquilibriumSampler::Exact { table, .. } => Some(table.mean_spin(origin)),
            EquilibriumSampler::BurnIn { .. } => None,
        }
    }
}

/// Estimator of `Var_μ(T(t) π_0)` for one disorder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceMethod {
    /// Several replicas from each start; the square of `T(t)π_0(ρ)` is
    /// estimated without bias from replica pairs.
    ReplicaPairs,
    /// Reversibility gives `Var(T(t)π_0) = E_μ[σ_0(0) σ_0(2t)] - μ(σ_0)^2`.
    TwoTime,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutocorrelationConfig {
    /// Equilibrium starts per disorder.
    pub starts: usize,
    /// Replicas per start (ignored by the two-time method).
    pub replicas: usize,
    pub seed: u64,
    pub method: VarianceMethod,
    /// Boxes up to this many sites use the exact equilibrium sampler.
    pub exact_cap: usize,
    /// Burn-in time for larger boxes.
    pub burn_in: f64,
}

impl Default for AutocorrelationConfig {
    fn default() -> Self {
        AutocorrelationConfig {
            starts: 200,
            replicas: 8,
            seed: 0,
            method: VarianceMethod::ReplicaPairs,
            exact_cap: 16,
            burn_in: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub replicas: usize,
}

/// `A^λ(t)` on a finite box: a finite-volume stand-in for the
/// infinite-volume quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutocorrelationCurve {
    pub lambda: f64,
    pub points: Vec<CurvePoint>,
    /// Burn-in used for each disorder, `None` where sampling was exact.
    pub burn_in: Vec<Option<f64>>,
    pub finite_volume_proxy: bool,
}

impl AutocorrelationCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,estimate,stderr,replicas\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{},{}", p.t, p.estimate, p.stderr, p.replicas);
        }
        out
    }
}

/// One disorder's variance estimate and its standard error at each time.
fn variance_curve(
    field: &CouplingField,
    model: &RateModel,
    times: &[f64],
    cfg: &AutocorrelationConfig,
    disorder_index: u64,
) -> Result<(Vec<(f64, f64)>, Option<f64>)> {
    let lattice = field.lattice();
    let origin = lattice
        .origin()
        .ok_or_else(|| Error::Domain("the box must contain the origin".into()))?;
    let sampler = EquilibriumSampler::for_field(field, model.beta, cfg.exact_cap, cfg.burn_in)?;
    let clock = clock_for(model, field)?;
    let master = seeding::derive_seed(cfg.seed, "autocorrelation", disorder_index);
    let starts = cfg.starts;
    let r = match cfg.method {
        VarianceMethod::ReplicaPairs => cfg.replicas,
        VarianceMethod::TwoTime => 1,
    };
    // per start: (σ_0(ρ), per-time statistic)
    let per_start: Vec<(f64, Vec<f64>)> = (0..starts as u64)
        .into_par_iter()
        .map(|k| -> Result<(f64, Vec<f64>)> {
            let mut rng = seeding::stream(master, "start", k);
            let rho = sampler.sample(field, model.beta, &mut rng)?;
            let y0 = rho.spin(origin) as f64;
            let mut stats = Vec::with_capacity(times.len());
            match cfg.method {
                VarianceMethod::ReplicaPairs => {
                    // replicas advance through the sorted times together
                    let mut reps: Vec<(SpinConfig, seeding::Stream)> = (0..r as u64)
                        .map(|j| (rho.clone(), seeding::stream(master, "replica", k * r as u64 + j)))
                        .collect();
                    let mut now = 0.0;
                    for &t in times {
                        for (s, g) in reps.iter_mut() {
                            evolve(field, model, s, t - now, clock, g);
                        }
                        now = t;
                        let sum: f64 = reps.iter().map(|(s, _)| s.spin(origin) as f64).sum();
                        let sq: f64 = reps.len() as f64; // σ² = 1
                        stats.push((sum * sum - sq) / (r * (r - 1)) as f64);
                    }
                }
                VarianceMethod::TwoTime => {
                    let mut s = rho.clone();
                    let mut g = seeding::stream(master, "replica", k);
                    let mut now = 0.0;
                    for &t in times {
                        evolve(field, model, &mut s, 2.0 * t - now, clock, &mut g);
                        now = 2.0 * t;
                        stats.push(y0 * s.spin(origin) as f64);
                    }
                }
            }
            Ok((y0, stats))
        })
        .collect::<Result<_>>()?;

    // μ(σ_0)^2: exact, or an unbiased pair estimate from the starts
    let (m2, m2_var) = match sampler.exact_origin_mean(origin) {
        Some(m) => (m * m, 0.0),
        None => {
            let ys: Vec<f64> = per_start.iter().map(|(y, _)| *y).collect();
            let (m, se) = mean_se(&ys);
            let n = ys.len() as f64;
            let s: f64 = ys.iter().sum();
            ((s * s - n) / (n * (n - 1.0)), (2.0 * m * se).powi(2))
        }
    };
    let mut out = Vec::with_capacity(times.len());
    for ti in 0..times.len() {
        let xs: Vec<f64> = per_start.iter().map(|(_, v)| v[ti]).collect();
        let (mean, se) = mean_se(&xs);
        out.push((mean - m2, (se * se + m2_var).sqrt()));
    }
    Ok((out, sampler.burn_in()))
}

/// Averaged autocorrelation `A^λ(t) = E[Var_{μ^{J,+}}(T^J(t) π_0)^λ]` over
/// the given disorder ensemble, at each time in `times` (sorted ascending).
pub fn estimate_autocorrelation(
    ensemble: &[CouplingField],
    model: &RateModel,
    lambda: f64,
    times: &[f64],
    cfg: &AutocorrelationConfig,
) -> Result<AutocorrelationCurve> {
    if ensemble.is_empty() {
        return Err(Error::Statistical("empty disorder ensemble".into()));
    }
    if cfg.starts < 2 {
        return Err(Error::Statistical("need at least two equilibrium starts".into()));
    }
    if cfg.method == VarianceMethod::ReplicaPairs && cfg.replicas < 2 {
        return Err(Error::Statistical("the replica-pair estimator needs at least two replicas".into()));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("exponent {lambda} must be positive")));
    }
    if times.windows(2).any(|w| w[1] < w[0]) || times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(Error::Domain("times must be finite, non-negative and sorted".into()));
    }
    let mut per_disorder = Vec::with_capacity(ensemble.len());
    let mut burn_in = Vec::with_capacity(ensemble.len());
    for (i, field) in ensemble.iter().enumerate() {
        let (v, b) = variance_curve(field, model, times, cfg, i as u64)?;
        per_disorder.push(v);
        burn_in.push(b);
    }
    let replicas = match cfg.method {
        VarianceMethod::ReplicaPairs => cfg.starts * cfg.replicas,
        VarianceMethod::TwoTime => cfg.starts,
    };
    let n = ensemble.len();
    let mut points = Vec::with_capacity(times.len());
    for (ti, &t) in times.iter().enumerate() {
        let mut g = Vec::with_capacity(n);
        let mut delta_var = 0.0;
        for curve in &per_disorder {
            let (v, se) = curve[ti];
            let vp = v.max(0.0);
            g.push(vp.powf(lambda));
            // delta method: d(v^λ)/dv = λ v^{λ-1}
            let slope = if lambda == 1.0 { 1.0 } else if vp > 0.0 { lambda * vp.powf(lambda - 1.0) } else { 0.0 };
            delta_var += (slope * se).powi(2);
        }
        let (mean, between) = mean_se(&g);
        let stderr = if n >= 2 { between } else { delta_var.sqrt() / n as f64 };
        points.push(CurvePoint { t, estimate: mean, stderr, replicas });
    }
    Ok(AutocorrelationCurve { lambda, points, burn_in, finite_volume_proxy: true })
}

/// Consistency checks on a recorded path against the clock construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlipCountReport {
    pub attempts: usize,
    pub accepted: usize,
    /// Mean of the attempt count, `c · t · |Λ|`.
    pub poisson_mean: f64,
    /// `log P(X = attempts)` under that Poisson law.
    pub log_pmf: f64,
    /// `‖M_K(σ(t)) − M_K(σ(0))‖_{L¹}`.
    pub l1_displacement: f64,
    /// Each flip moves the profile by at most `2/|Λ|` in `L¹`.
    pub l1_bound: f64,
    pub accepted_le_attempts: bool,
    pub displacement_within_bound: bool,
}

pub fn flip_count_bound_check(traj: &Trajectory, clock: f64, block: usize) -> Result<FlipCountReport> {
    let n = traj.initial.spins().len();
    let attempts = traj.attempts();
    let accepted = traj.accepted();
    let poisson_mean = clock * traj.t_end * n as f64;
    let a = profile_mk(&traj.initial, block)?;
    let b = profile_mk(&traj.final_state(), block)?;
    let side = a.side as f64;
    let width = |i: usize| {
        let lo = (i * a.block) as f64 / side;
        let hi = (((i + 1) * a.block) as f64 / side).min(1.0);
        hi - lo
    };
    let bpa = a.blocks_per_axis;
    let mut l1 = 0.0;
    for flat in 0..a.values.len() {
        let mut r = flat;
        let mut vol = 1.0;
        for _ in 0..a.dim {
            vol *= width(r % bpa);
            r /= bpa;
        }
        l1 += (a.values[flat] - b.values[flat]).abs() * vol;
    }
    let l1_bound = 2.0 * accepted as f64 / n as f64;
    Ok(FlipCountReport {
        attempts,
        accepted,
        poisson_mean,
        log_pmf: ln_poisson_pmf(attempts as u64, poisson_mean),
        l1_displacement: l1,
        l1_bound,
        accepted_le_attempts: accepted <= attempts,
        displacement_within_bound: l1 <= l1_bound + 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::simulate;
    use crate::model::LatticeBox;
    use std::sync::Arc;

    #[test]
    fn semigroup_trivial_cases() {
        let l = Arc::new(LatticeBox::symmetric(2, 1).unwrap());
        let f = CouplingField::uniform(l.clone(), 1.0).unwrap();
        let s = SpinConfig::constant(l, 1, Boundary::Plus).unwrap();
        let m = RateModel::heat_bath(0.5);
        let (v, se) = estimate_semigroup(&f, &m, |c| c.spin(4) as f64, &s, 0.0, 10, 1).unwrap();
        assert_eq!((v, se), (1.0, 0.0));
        let (v, se) = estimate_semigroup(&f, &m, |_| 3.0, &s, 2.0, 10, 1).unwrap();
        assert_eq!((v, se), (3.0, 0.0));
        assert!(estimate_semigroup(&f, &m, |_| 3.0, &s, 2.0, 1, 1).is_err());
    }

    #[test]
    fn autocorrelation_at_zero_for_free_spin() {
        let l = Arc::new(LatticeBox::symmetric(2, 0).unwrap());
        let f = CouplingField::uniform(l, 0.0).unwrap();
        let cfg = AutocorrelationConfig { starts: 50, replicas: 4, ..Default::default() };
        let c = estimate_autocorrelation(&[f], &RateModel::heat_bath(1.0), 1.0, &[0.0], &cfg).unwrap();
        assert_eq!(c.points[0].estimate, 1.0);
        assert!(c.finite_volume_proxy);
        assert_eq!(c.burn_in, vec![None]);
    }

    #[test]
    fn flip_report_invariants() {
        let l = Arc::new(LatticeBox::from_ranges(&[(0, 3), (0, 3)]).unwrap());
        let f = CouplingField::uniform(l.clone(), 1.0).unwrap();
        let s = SpinConfig::constant(l, 1, Boundary::Plus).unwrap();
        let m = RateModel::metropolis(0.3);
        let clock = m.clock(2, 1.0).unwrap();
        let t = simulate(&f, &m, &s, 0.0, DynamicsSeed::new(0, 0)).unwrap();
        let r = flip_count_bound_check(&t, clock, 2).unwrap();
        assert_eq!(r.attempts, 0);
        for k in 0..20 {
            let t = simulate(&f, &m, &s, 0.2, DynamicsSeed::new(4, k)).unwrap();
            let r = flip_count_bound_check(&t, clock, 2).unwrap();
            assert!(r.accepted_le_attempts && r.displacement_within_bound);
        }
    }
}
