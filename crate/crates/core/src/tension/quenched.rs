use std::collections::HashSet;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::rect::{
    exact_estimate, mc_disconnection, tension_from, DisconnectionCache, EvalMode, McBudget, RectSpec, Rectangle,
    TensionEstimate, RECT_EXACT_CAP,
};
use crate::cluster::edge_probability;
use crate::model::{CouplingField, DisorderSpec, LatticeBox};
use crate::seeding;
use crate::stats::mean_se;
use crate::{Error, Result};

/// Evaluates `τ^J_R` for many coupling fields on one rectangle, enumerating
/// the configuration space once when it is small enough.
pub struct TensionEvaluator {
    pub rect: Rectangle,
    cache: Option<DisconnectionCache>,
    budget: McBudget,
}

impl TensionEvaluator {
    pub fn new(rect: Rectangle, mode: EvalMode, budget: McBudget) -> Result<Self> {
        let exact = match mode {
            EvalMode::Exact => true,
            EvalMode::MonteCarlo => false,
            EvalMode::Auto => rect.num_edges() <= RECT_EXACT_CAP,
        };
        let cache = if exact { Some(DisconnectionCache::new(&rect)?) } else { None };
        Ok(TensionEvaluator { rect, cache, budget })
    }

    pub fn is_exact(&self) -> bool {
        self.cache.is_some()
    }

    /// `τ` for couplings on the rectangle's edges; `stream` distinguishes
    /// Monte Carlo runs.
    pub fn tau(&self, j: &[f64], beta: f64, stream: u64) -> Result<TensionEstimate> {
        if j.len() != self.rect.num_edges() {
            return Err(Error::Domain("one coupling per rectangle edge is required".into()));
        }
        let p: Vec<f64> = j.iter().map(|&x| edge_probability(beta, x)).collect();
        let est = match &self.cache {
            Some(c) => exact_estimate(c.probability(&p, 2.0)),
            None => {
                let b = McBudget { seed: seeding::derive_seed(self.budget.seed, "tension-run", stream), ..self.budget };
                mc_disconnection(&self.rect, &p, &b)?
            }
        };
        Ok(tension_from(&self.rect, est))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuenchedRow {
    #[serde(rename = "L")]
    pub l: f64,
    pub delta: f64,
    pub beta: f64,
    pub replica: usize,
    pub tau_hat: f64,
    pub tau_lo: f64,
    pub tau_hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuenchedSummary {
    #[serde(rename = "L")]
    pub l: f64,
    pub mean_tau: f64,
    pub stderr: f64,
    /// Sample standard deviation over disorder replicas.
    pub spread: f64,
    pub tau_min: f64,
    pub tau_max: f64,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuenchedTable {
    pub rows: Vec<QuenchedRow>,
    pub summary: Vec<QuenchedSummary>,
    /// Whether the mean tension is monotone in `L` (either direction).
    pub monotone_trend: bool,
    /// These are finite-size estimates of the quenched value.
    pub label: String,
}

impl QuenchedTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("L,delta,beta,replica,tau_hat,tau_lo,tau_hi\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{},{},{},{}", r.l, r.delta, r.beta, r.replica, r.tau_hat, r.tau_lo, r.tau_hi);
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuenchedConfig {
    pub dim: usize,
    /// Normal axis.
    pub axis: usize,
    pub beta: f64,
    pub sizes: Vec<f64>,
    pub replicas: usize,
    pub delta: f64,
    pub mode: EvalMode,
    pub budget: McBudget,
}

/// Disorder statistics of `τ^J` on `R_{0, L, δL}` for each size, plus the
/// extremal curves at `J ≡ J^min` and `J ≡ J^max`.
pub fn estimate_quenched_tension(cfg: &QuenchedConfig, disorder: &DisorderSpec) -> Result<QuenchedTable> {
    disorder.validate()?;
    if cfg.replicas == 0 {
        return Err(Error::Statistical("at least one disorder replica is needed".into()));
    }
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for (si, &l) in cfg.sizes.iter().enumerate() {
        let rect = Rectangle::new(RectSpec::centered(cfg.dim, l, cfg.delta, cfg.axis))?;
        if rect.num_edges() == 0 {
            return Err(Error::Domain(format!("the rectangle of size {l} has no interior edges")));
        }
        let ev = TensionEvaluator::new(rect, cfg.mode, cfg.budget)?;
        let m = ev.rect.num_edges();
        let field_box = Arc::new(LatticeBox::from_sites(cfg.dim, ev.rect.sites().to_vec())?);
        let mut taus = Vec::with_capacity(cfg.replicas);
        for r in 0..cfg.replicas {
            let spec = DisorderSpec {
                law: disorder.law.clone(),
                seed: seeding::derive_seed(disorder.seed, "quenched-disorder", ((si as u64) << 32) | r as u64),
            };
            let field = CouplingField::sample(field_box.clone(), &spec)?;
            let j = ev.rect.couplings(&field)?;
            let t = ev.tau(&j, cfg.beta, ((si as u64) << 32) | r as u64)?;
            rows.push(QuenchedRow {
                l,
                delta: cfg.delta,
                beta: cfg.beta,
                replica: r,
                tau_hat: t.tau,
                tau_lo: t.tau_lo,
                tau_hi: t.tau_hi,
            });
            taus.push(t.tau);
        }
        let (mean_tau, stderr) = mean_se(&taus);
        let spread = if taus.len() > 1 { stderr * (taus.len() as f64).sqrt() } else { 0.0 };
        let spread = if taus.iter().all(|&t| t == taus[0]) { 0.0 } else { spread };
        let tau_min = ev.tau(&vec![disorder.j_min(); m], cfg.beta, u64::MAX - 1)?.tau;
        let tau_max = ev.tau(&vec![disorder.j_max(); m], cfg.beta, u64::MAX)?.tau;
        summary.push(QuenchedSummary {
            l,
            mean_tau,
            stderr: if stderr.is_nan() { 0.0 } else { stderr },
            spread,
            tau_min,
            tau_max,
            exact: ev.is_exact(),
        });
    }
    let means: Vec<f64> = summary.iter().map(|s| s.mean_tau).collect();
    let monotone_trend = means.windows(2).all(|w| w[1] >= w[0]) || means.windows(2).all(|w| w[1] <= w[0]);
    Ok(QuenchedTable { rows, summary, monotone_trend, label: "finite-size estimate".into() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilutionReport {
    pub holds: bool,
    /// `τ^J_{R_i} - τ^r(x_i)` per rectangle.
    pub margins: Vec<f64>,
}

/// The dilution event: `τ^J_{R_i} ≤ τ^r(x_i)` for every rectangle.
pub fn dilution_event_check(
    field: &CouplingField,
    rects: &[Rectangle],
    thresholds: &[f64],
    beta: f64,
    mode: EvalMode,
    budget: &McBudget,
) -> Result<DilutionReport> {
    if rects.len() != thresholds.len() {
        return Err(Error::Domain("one threshold per rectangle is required".into()));
    }
    let mut seen = HashSet::new();
    for r in rects {
        for p in r.lattice.sites() {
            if !seen.insert(p.clone()) {
                return Err(Error::Domain(format!("rectangles overlap at {p:?}")));
            }
        }
    }
    let mut margins = Vec::with_capacity(rects.len());
    for (i, (r, &t)) in rects.iter().zip(thresholds).enumerate() {
        let ev = TensionEvaluator::new(r.clone(), mode, McBudget { seed: seeding::derive_seed(budget.seed, "dilution", i as u64), ..*budget })?;
        let tau = ev.tau(&r.couplings(field)?, beta, i as u64)?;
        margins.push(tau.tau - t);
    }
    Ok(DilutionReport { holds: margins.iter().all(|&m| m <= 0.0), margins })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_law_has_no_spread() {
        let cfg = QuenchedConfig {
            dim: 2,
            axis: 1,
            beta: 0.8,
            sizes: vec![3.0, 4.0],
            replicas: 3,
            delta: 0.5,
            mode: EvalMode::Auto,
            budget: McBudget::default(),
        };
        let t = estimate_quenched_tension(&cfg, &DisorderSpec::constant(1.0)).unwrap();
        assert!(t.summary.iter().all(|s| s.spread == 0.0 && s.exact));
        assert_eq!(t.rows.len(), 6);
        let t0 = estimate_quenched_tension(&QuenchedConfig { beta: 0.0, ..cfg }, &DisorderSpec::bernoulli(0.2, 1)).unwrap();
        assert!(t0.rows.iter().all(|r| r.tau_hat == 0.0));
        assert!(t0.to_csv().starts_with("L,delta,beta,replica,tau_hat,tau_lo,tau_hi\n"));
    }

    #[test]
    fn dilution_event_cases() {
        let l = Arc::new(LatticeBox::symmetric(2, 4).unwrap());
        let a = Rectangle::new(RectSpec::new(vec![-2.0, 0.0], 3.0, 1.5, 1)).unwrap();
        let b = Rectangle::new(RectSpec::new(vec![2.0, 0.0], 3.0, 1.5, 1)).unwrap();
        let rects = vec![a.clone(), b.clone()];
        let zero = CouplingField::uniform(l.clone(), 0.0).unwrap();
        let bud = McBudget::default();
        assert!(dilution_event_check(&zero, &rects, &[0.1, 0.1], 1.0, EvalMode::Exact, &bud).unwrap().holds);
        let one = CouplingField::uniform(l.clone(), 1.0).unwrap();
        assert!(!dilution_event_check(&one, &rects, &[0.01, 0.01], 1.0, EvalMode::Exact, &bud).unwrap().holds);
        // dilute one cross-section per rectangle
        let mut cut = a.cross_section(-1);
        cut.extend(b.cross_section(-1));
        let diluted = one.force_dilution_points(&cut).unwrap();
        let rep = dilution_event_check(&diluted, &rects, &[0.0, 0.0], 1.0, EvalMode::Exact, &bud).unwrap();
        assert!(rep.holds, "{rep:?}");
        assert!(dilution_event_check(&one, &[a.clone(), a], &[1.0, 1.0], 1.0, EvalMode::Exact, &bud).is_err());
    }
}
