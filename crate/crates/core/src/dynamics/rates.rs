use serde::{Deserialize, Serialize};

use crate::model::{CouplingField, GibbsTable, LatticeBox, SpinConfig};
use crate::{Error, Result};

/// Flip-rate family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateKind {
    /// `c = max(1, exp(-β h))`.
    Metropolis,
    /// `c = 1 / (1 + exp(β h))`: the single-site conditional probability of
    /// the flipped spin.
    HeatBath,
    /// Piecewise-linear rate as a function of `h`, given by `(h, c)` knots
    /// sorted by `h`; constant beyond the end knots.
    Custom { table: Vec<(f64, f64)> },
}

/// A rate model `c^J(x, σ)` depending only on the local energy
/// `h = σ_x Σ_{y∼x} J_{xy} σ_y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateModel {
    #[serde(flatten)]
    pub kind: RateKind,
    pub beta: f64,
}

impl RateModel {
    pub fn metropolis(beta: f64) -> Self {
        RateModel { kind: RateKind::Metropolis, beta }
    }

    pub fn heat_bath(beta: f64) -> Self {
        RateModel { kind: RateKind::HeatBath, beta }
    }

    pub fn custom(beta: f64, table: Vec<(f64, f64)>) -> Self {
        RateModel { kind: RateKind::Custom { table }, beta }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::Model(format!("inverse temperature {} must be finite and >= 0", self.beta)));
        }
        if let RateKind::Custom { table } = &self.kind {
            if table.is_empty() {
                return Err(Error::Model("empty rate table".into()));
            }
            if table.iter().any(|(h, c)| !h.is_finite() || !c.is_finite()) {
                return Err(Error::Model("rate table entries must be finite".into()));
            }
            if table.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(Error::Model("rate table knots must be strictly increasing".into()));
            }
        }
        Ok(())
    }

    /// Rate as a function of the local energy `h`.
    pub fn rate_of(&self, h: f64) -> f64 {
        match &self.kind {
            RateKind::Metropolis => (-self.beta * h).exp().max(1.0),
            RateKind::HeatBath => {
                // Evaluate through g = 1/(1+e^{-β|h|}) so that c(h) + c(-h)
                // is exactly 1 in floating point.
                let g = 1.0 / (1.0 + (-self.beta * h.abs()).exp());
                if h > 0.0 {
                    1.0 - g
                } else {
                    g
                }
            }
            RateKind::Custom { table } => interpolate(table, h),
        }
    }

    /// `c^J(x, σ)`.
    pub fn rate(&self, field: &CouplingField, sigma: &SpinConfig, x: usize) -> f64 {
        self.rate_of(sigma.local_field(field, x))
    }

    /// Uniform bounds `(c_m, c_M)` over all configurations of a box in
    /// dimension `d` whose couplings are at most `j_max`.
    pub fn bounds(&self, d: usize, j_max: f64) -> (f64, f64) {
        let a = 2.0 * d as f64 * self.beta * j_max;
        match &self.kind {
            RateKind::Metropolis => (1.0, a.exp()),
            RateKind::HeatBath => (1.0 / (1.0 + a.exp()), 1.0 / (1.0 + (-a).exp())),
            RateKind::Custom { table } => {
                let hmax = 2.0 * d as f64 * j_max;
                let mut vals = vec![interpolate(table, -hmax), interpolate(table, hmax)];
                vals.extend(table.iter().filter(|(h, _)| h.abs() <= hmax).map(|&(_, c)| c));
                let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            }
        }
    }

    /// A rate is attractive under the threshold coupling iff it is
    /// nonincreasing in `h`.
    pub fn is_attractive(&self) -> bool {
        match &self.kind {
            RateKind::Metropolis | RateKind::HeatBath => true,
            RateKind::Custom { table } => table.windows(2).all(|w| w[1].1 <= w[0].1),
        }
    }

    /// Intensity of each site's Poisson clock in the graphical construction.
    ///
    /// It must dominate every rate and also `c(-,σ) + c(+,σ')` for `σ ≤ σ'`,
    /// which is what makes the shared-uniform coupling monotone.
    pub fn clock(&self, d: usize, j_max: f64) -> Result<f64> {
        self.validate()?;
        let c = match &self.kind {
            RateKind::HeatBath => 1.0,
            RateKind::Metropolis => 1.0 + self.bounds(d, j_max).1,
            RateKind::Custom { table } => 2.0 * table.iter().fold(0.0f64, |m, &(_, c)| m.max(c)),
        };
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Model(format!("clock intensity {c} is not finite and positive")));
        }
        Ok(c)
    }
}

fn interpolate(table: &[(f64, f64)], h: f64) -> f64 {
    let i = table.partition_point(|&(k, _)| k <= h);
    if i == 0 {
        return table[0].1;
    }
    if i == table.len() {
        return table[i - 1].1;
    }
    let (h0, c0) = table[i - 1];
    let (h1, c1) = table[i];
    c0 + (c1 - c0) * (h - h0) / (h1 - h0)
}

/// One probe for the axiom checker.
#[derive(Clone, Debug)]
pub struct Probe {
    pub field: CouplingField,
    pub sigma: SpinConfig,
    pub site: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomResult {
    pub axiom: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub results: Vec<AxiomResult>,
}

impl AxiomReport {
    pub fn pass(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }

    pub fn get(&self, axiom: &str) -> Option<&AxiomResult> {
        self.results.iter().find(|r| r.axiom == axiom)
    }
}

/// Largest box for which attractivity is checked over all ordered pairs.
const ATTRACTIVITY_CAP: usize = 8;

/// Check finite range, uniform bounds, detailed balance and attractivity on
/// the probes. Attractivity is checked over all pairs `σ ≤ σ'` of every
/// probe box small enough to enumerate.
pub fn check_rate_axioms(model: &RateModel, probes: &[Probe]) -> AxiomReport {
    let mut results = Vec::new();
    if let Err(e) = model.validate() {
        results.push(AxiomResult { axiom: "well_formed".into(), pass: false, detail: e.to_string() });
        return AxiomReport { results };
    }

    // finite range: the rate depends only on spins at distance 1
    let mut range_ok = true;
    let mut range_detail = String::from("rate unchanged when a non-neighbour spin flips");
    'outer: for p in probes {
        let base = model.rate(&p.field, &p.sigma, p.site);
        let lattice = p.sigma.lattice();
        let x = &lattice.sites()[p.site];
        for (z, q) in lattice.sites().iter().enumerate() {
            let dist: i64 = x.iter().zip(q).map(|(a, b)| (a - b).abs()).sum();
            if dist > 1 {
                let r = model.rate(&p.field, &p.sigma.flipped(z), p.site);
                if r.to_bits() != base.to_bits() {
                    range_ok = false;
                    range_detail = format!("rate at site {} moved when site {z} flipped", p.site);
                    break 'outer;
                }
            }
        }
    }
    results.push(AxiomResult { axiom: "finite_range".into(), pass: range_ok, detail: range_detail });

    // uniform bounds
    let mut lo_ok = true;
    let mut hi_ok = true;
    let mut worst = (f64::INFINITY, 0.0f64);
    for p in probes {
        let d = p.sigma.lattice().dim();
        let jm = p.field.max_value();
        let (cm, c_max) = model.bounds(d, jm);
        let c = model.rate(&p.field, &p.sigma, p.site);
        worst = (worst.0.min(c), worst.1.max(c));
        if !(c > 0.0 && c >= cm * (1.0 - 1e-12) && cm > 0.0) {
            lo_ok = false;
        }
        if !(c.is_finite() && c <= c_max * (1.0 + 1e-12)) {
            hi_ok = false;
        }
    }
    results.push(AxiomResult {
        axiom: "bounded_below".into(),
        pass: lo_ok,
        detail: format!("smallest rate seen {}", worst.0),
    });
    results.push(AxiomResult {
        axiom: "bounded_above".into(),
        pass: hi_ok,
        detail: format!("largest rate seen {}", worst.1),
    });

    // detailed balance: c(x,σ) exp((β/2) h(σ)) must not depend on σ_x
    let mut db_worst = 0.0f64;
    for p in probes {
        let a = &p.sigma;
        let b = a.flipped(p.site);
        let ha = a.local_field(&p.field, p.site);
        let hb = b.local_field(&p.field, p.site);
        let la = model.rate_of(ha) * (0.5 * model.beta * ha).exp();
        let lb = model.rate_of(hb) * (0.5 * model.beta * hb).exp();
        db_worst = db_worst.max((la - lb).abs() / la.abs().max(lb.abs()));
    }
    results.push(AxiomResult {
        axiom: "detailed_balance".into(),
        pass: db_worst <= 1e-12,
        detail: format!("largest relative defect {db_worst:e}"),
    });

    // attractivity
    let mut att_ok = true;
    let mut att_detail = String::from("checked all ordered pairs of enumerable probe boxes");
    let mut seen: Vec<(*const LatticeBox, Vec<u64>)> = Vec::new();
    'att: for p in probes {
        let lattice = p.sigma.lattice();
        let n = lattice.len();
        if n > ATTRACTIVITY_CAP {
            continue;
        }
        let key = (std::sync::Arc::as_ptr(lattice), p.field.values().iter().map(|v| v.to_bits()).collect());
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        let bc = p.sigma.boundary().clone();
        let cfg = |s: u64| SpinConfig::from_bits(lattice.clone(), s, bc.clone()).expect("small box");
        for lo in 0..(1u64 << n) {
            let a = cfg(lo);
            // supersets of lo
            let free = !lo & ((1u64 << n) - 1);
            let mut sub = free;
            loop {
                let b = cfg(lo | sub);
                for x in 0..n {
                    if a.spin(x) == b.spin(x) {
                        let (ca, cb) = (model.rate(&p.field, &a, x), model.rate(&p.field, &b, x));
                        // a lower configuration flips + spins at least as fast
                        // and - spins at most as fast
                        let bad = if a.spin(x) == 1 { ca < cb - 1e-12 } else { ca > cb + 1e-12 };
                        if bad {
                            att_ok = false;
                            att_detail = format!("site {x}, states {lo:#b} <= {:#b}", lo | sub);
                            break 'att;
                        }
                    }
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & free;
            }
        }
    }
    results.push(AxiomResult { axiom: "attractive".into(), pass: att_ok, detail: att_detail });
    AxiomReport { results }
}

/// Exhaustive probe set: every configuration and site of a box.
pub fn exhaustive_probes(field: &CouplingField, boundary: crate::model::Boundary) -> Result<Vec<Probe>> {
    let lattice = field.lattice();
    let n = lattice.len();
    if n > 16 {
        return Err(Error::Capacity(format!("{n} sites is too many for exhaustive probes")));
    }
    let mut out = Vec::new();
    for s in 0..(1u64 << n) {
        let sigma = SpinConfig::from_bits(lattice.clone(), s, boundary.clone())?;
        for x in 0..n {
            out.push(Probe { field: field.clone(), sigma: sigma.clone(), site: x });
        }
    }
    Ok(out)
}

/// Largest violation of `μ(σ) c(x,σ) = μ(σ^x) c(x,σ^x)`, relative to the
/// larger side, over every state and site of an enumerable box.
pub fn reversibility_defect(model: &RateModel, field: &CouplingField, table: &GibbsTable) -> f64 {
    let n = table.lattice().len();
    let mut worst = 0.0f64;
    for s in 0..table.len() as u64 {
        let sigma = table.config(s);
        for x in 0..n {
            let t = s ^ (1 << x);
            let lhs = table.prob(s) * model.rate(field, &sigma, x);
            let rhs = table.prob(t) * model.rate(field, &table.config(t), x);
            let scale = lhs.abs().max(rhs.abs());
            if scale > 0.0 {
                worst = worst.max((lhs - rhs).abs() / scale);
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Boundary, DisorderSpec};
    use std::sync::Arc;

    fn two_by_two(seed: u64) -> CouplingField {
        let l = Arc::new(LatticeBox::from_ranges(&[(0, 1), (0, 1)]).unwrap());
        CouplingField::sample(l, &DisorderSpec::bernoulli(0.3, seed)).unwrap()
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(RateModel::metropolis(0.7).rate_of(0.0), 1.0);
        for h in [-4.0, -1.0, 0.0, 2.5] {
            assert_eq!(RateModel::heat_bath(0.0).rate_of(h), 0.5);
        }
        let l = Arc::new(LatticeBox::symmetric(2, 0).unwrap());
        let f = CouplingField::uniform(l.clone(), 1.0).unwrap();
        let s = SpinConfig::constant(l, 1, Boundary::Plus).unwrap();
        let beta = 0.6f64;
        let want = (-2.0 * beta).exp() / ((2.0 * beta).exp() + (-2.0 * beta).exp());
        assert!((RateModel::heat_bath(beta).rate(&f, &s, 0) - want).abs() < 1e-15);
    }

    #[test]
    fn heat_bath_complement_is_exact() {
        let m = RateModel::heat_bath(1.37);
        for k in -40..=40 {
            let h = k as f64 * 0.173;
            assert_eq!(m.rate_of(h) + m.rate_of(-h), 1.0);
        }
    }

    #[test]
    fn standard_models_satisfy_axioms() {
        for seed in 0..4 {
            let f = two_by_two(seed);
            for bc in [Boundary::Plus, Boundary::Minus] {
                let probes = exhaustive_probes(&f, bc).unwrap();
                for m in [RateModel::metropolis(0.8), RateModel::heat_bath(0.8)] {
                    let r = check_rate_axioms(&m, &probes);
                    assert!(r.pass(), "{m:?}: {r:?}");
                }
            }
        }
        // the heat-bath rates also clear the looser 1/(1+e^{4dβ}) bound
        let beta = 0.8;
        let f = two_by_two(1);
        let loose = 1.0 / (1.0 + (4.0 * 2.0 * beta * f.max_value()).exp());
        for p in exhaustive_probes(&f, Boundary::Plus).unwrap() {
            assert!(RateModel::heat_bath(beta).rate(&p.field, &p.sigma, p.site) >= loose);
        }
    }

    #[test]
    fn broken_table_fails_lower_bound() {
        let m = RateModel::custom(0.5, vec![(-4.0, 1.0), (0.0, 0.0), (4.0, 0.0)]);
        let r = check_rate_axioms(&m, &exhaustive_probes(&two_by_two(0), Boundary::Plus).unwrap());
        assert!(!r.get("bounded_below").unwrap().pass);
        let increasing = RateModel::custom(0.5, vec![(-4.0, 0.1), (4.0, 1.0)]);
        assert!(!increasing.is_attractive());
        let r = check_rate_axioms(&increasing, &exhaustive_probes(&two_by_two(0), Boundary::Plus).unwrap());
        assert!(!r.get("attractive").unwrap().pass);
    }

    #[test]
    fn reversible_against_gibbs() {
        for seed in 0..3 {
            let f = two_by_two(seed);
            let g = GibbsTable::new(&f, 0.9, Boundary::Plus).unwrap();
            for m in [RateModel::metropolis(0.9), RateModel::heat_bath(0.9)] {
                assert!(reversibility_defect(&m, &f, &g) < 1e-12);
            }
        }
    }
}
