//! End-to-end reproductions of the acceptance criteria, one function per
//! criterion, addressable by number or slug.

use std::f64::consts::{LN_2, PI};
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::run::{box_shapes, es_marginal_errors};
use crate::barrier::{
    barrier_disk, barrier_grid_minimax, barrier_grid_minimax_dijkstra, barrier_square, constrained_barrier_square,
    decompose_droplets, decompose_symmetric, evaluate_evolution, exponent_xlambda, kappa, surface_energy_reduced, Candidate,
    EvolutionPath, Family, GridProfile, PhaseProfile, ReducedTension, SurfaceTensionFn,
};
use crate::cluster::{edge_probability, UnionFind};
use crate::dynamics::{
    estimate_autocorrelation, reversibility_defect, simulate, simulate_coupled, AutocorrelationConfig, DynamicsSeed,
    RateModel, VarianceMethod,
};
use crate::model::{Boundary, CouplingField, GibbsTable, LatticeBox, SpinConfig};
use crate::seeding;
use crate::spectral::{verify_lemma_f1, verify_variance_decay, ExactGenerator};
use crate::stats::poisson_tv;
use crate::tension::{disconnection_prob, DisconnectionCache, EvalMode, McBudget, RateFunctionModel, RectSpec, Rectangle};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: usize,
    pub slug: String,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

type Check = fn() -> Result<(bool, String)>;

pub const CRITERIA: [(&str, Check); 11] = [
    ("es-marginals", es_marginals),
    ("detailed-balance", detailed_balance),
    ("spectral-facts", spectral_facts),
    ("plus-state-bound", plus_state_bound),
    ("disk-barrier", disk_barrier),
    ("square-barrier", square_barrier),
    ("constrained-square", constrained_square),
    ("tension-monotonicity", tension_monotonicity),
    ("geometry-identities", geometry_identities),
    ("dynamics", dynamics),
    ("exponents", exponents),
];

/// Criterion index (1-based) for a number or slug.
pub fn criterion_index(id: &str) -> Result<usize> {
    if let Ok(k) = id.parse::<usize>() {
        if (1..=CRITERIA.len()).contains(&k) {
            return Ok(k);
        }
    }
    CRITERIA
        .iter()
        .position(|(slug, _)| *slug == id)
        .map(|i| i + 1)
        .ok_or_else(|| Error::Config(format!("unknown acceptance criterion `{id}`")))
}

pub fn repro(id: &str) -> Result<CriterionOutcome> {
    let k = criterion_index(id)?;
    let (slug, f) = CRITERIA[k - 1];
    let start = Instant::now();
    let (pass, detail) = f()?;
    Ok(CriterionOutcome { id: k, slug: slug.into(), pass, detail, seconds: start.elapsed().as_secs_f64() })
}

fn rng(tag: &str, index: u64) -> seeding::Stream {
    seeding::stream(0xacce, tag, index)
}

fn random_field(lattice: Arc<LatticeBox>, g: &mut impl Rng) -> Result<CouplingField> {
    let values = (0..lattice.edges().len()).map(|_| g.gen::<f64>()).collect();
    CouplingField::from_values(lattice, values)
}

fn es_marginals() -> Result<(bool, String)> {
    let start = Instant::now();
    let entries = es_marginal_errors(2, 4, 5, (0.1, 2.0), None, 0xacce)?;
    let worst = entries.iter().fold(0.0f64, |m, e| m.max(e.sigma_error).max(e.omega_error));
    let secs = start.elapsed().as_secs_f64();
    Ok((worst < 1e-12 && secs < 10.0, format!("{} cases, max error {worst:.2e}, {secs:.2}s", entries.len())))
}

fn detailed_balance() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for (i, shape) in box_shapes(2, 9).into_iter().enumerate() {
        let ranges: Vec<(i64, i64)> = shape.iter().map(|&a| (0, a as i64 - 1)).collect();
        let lattice = Arc::new(LatticeBox::from_ranges(&ranges)?);
        let mut g = rng("detailed-balance", i as u64);
        let field = random_field(lattice, &mut g)?;
        let beta = 0.1 + 1.9 * g.gen::<f64>();
        let table = GibbsTable::new(&field, beta, Boundary::Plus)?;
        for model in [RateModel::heat_bath(beta), RateModel::metropolis(beta)] {
            let gen = ExactGenerator::new(&field, &model, Boundary::Plus)?;
            worst = worst.max(reversibility_defect(&model, &field, &table)).max(gen.stationarity_defect());
            cases += 1;
        }
    }
    Ok((worst <= 1e-12, format!("{cases} (box, model) cases, max defect {worst:.2e}")))
}

fn spectral_facts() -> Result<(bool, String)> {
    let single = Arc::new(LatticeBox::from_ranges(&[(0, 0), (0, 0)])?);
    let mut gap_err: f64 = 0.0;
    for (k, beta) in [0.0, 0.3, 1.0, 2.5].into_iter().enumerate() {
        let field = random_field(single.clone(), &mut rng("single-site", k as u64))?;
        let gen = ExactGenerator::new(&field, &RateModel::heat_bath(beta), Boundary::Plus)?;
        gap_err = gap_err.max((gen.spectral_gap()?.gap - 1.0).abs());
    }
    let hot = CouplingField::uniform(single, 1.0)?;
    let tmix = ExactGenerator::new(&hot, &RateModel::heat_bath(0.0), Boundary::Plus)?.mixing_time()?;
    let tmix_err = (tmix - (1.0 - LN_2)).abs();
    let mut decay_fail = 0;
    let mut probes = 0;
    for (i, ranges) in [vec![(0, 1), (0, 1)], vec![(-1, 1), (-1, 1)], vec![(-1, 1), (-1, 2)]].into_iter().enumerate() {
        let lattice = Arc::new(LatticeBox::from_ranges(&ranges)?);
        let mut g = rng("variance-decay", i as u64);
        let field = random_field(lattice.clone(), &mut g)?;
        let gen = ExactGenerator::new(&field, &RateModel::heat_bath(0.2 + g.gen::<f64>()), Boundary::Plus)?;
        let mut fs = vec![gen.spin_function(lattice.origin().expect("origin"))];
        fs.push((0..gen.states()).map(|_| g.gen::<f64>() * 2.0 - 1.0).collect());
        let times = [0.0, 0.1, 0.5, 1.0, 2.0, 5.0];
        for f in &fs {
            let r = verify_variance_decay(&gen, f, &times)?;
            probes += r.checks.iter().filter(|c| !c.name.starts_with("literal:")).count();
            decay_fail += r.failures().len();
        }
    }
    let pass = gap_err < 1e-12 && tmix_err < 1e-6 && decay_fail == 0;
    Ok((pass, format!("gap error {gap_err:.1e}, tmix error {tmix_err:.1e}, {decay_fail}/{probes} decay checks failed")))
}

fn plus_state_bound() -> Result<(bool, String)> {
    let mut worst = f64::INFINITY;
    for k in 0..50u64 {
        let ranges = if k % 2 == 0 { vec![(0, 1), (0, 1)] } else { vec![(-1, 1), (-1, 1)] };
        let lattice = Arc::new(LatticeBox::from_ranges(&ranges)?);
        let mut g = rng("plus-state-bound", k);
        let field = random_field(lattice, &mut g)?;
        let beta = 0.1 + 1.9 * g.gen::<f64>();
        let t = 3.0 * g.gen::<f64>();
        let model = if k % 4 < 2 { RateModel::heat_bath(beta) } else { RateModel::metropolis(beta) };
        let r = verify_lemma_f1(&field, &model, t)?;
        let c = r.checks.iter().find(|c| c.name == "half-variance").expect("present");
        worst = worst.min(c.slack);
    }
    Ok((worst >= -1e-10, format!("50 instances, smallest slack {worst:.3e}")))
}

/// Stated spot value of the disk barrier at `(r, λ) = (1/4, 1/2)`; the
/// closed form itself evaluates to 0.1712133.
const DISK_SPOT_REFERENCE: f64 = 0.171239;

fn disk_barrier() -> Result<(bool, String)> {
    let iso = SurfaceTensionFn::isotropic(1.0);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        for j in 0..20 {
            let r = 0.02 + 0.46 * i as f64 / 19.0;
            let lambda = 0.02 + 0.96 * j as f64 / 19.0;
            let family = Family::ChordSweep { center: [0.5, 0.5], radius: r };
            let u0 = family.start();
            let v = evaluate_evolution(&EvolutionPath::Continuous { family }, &u0, &ReducedTension::constant(lambda), &iso)?;
            worst = worst.max((v.k_contribution - barrier_disk(r, lambda)?).abs());
        }
    }
    let spot = barrier_disk(0.25, 0.5)?;
    let spot_err = (spot - DISK_SPOT_REFERENCE).abs();
    let pass = worst < 1e-9 && spot_err <= 1e-6;
    Ok((
        pass,
        format!(
            "sweep vs closed form max |Δ| {worst:.2e} on 20x20; spot value {spot:.7} vs reference {DISK_SPOT_REFERENCE} (|Δ| {spot_err:.1e})"
        ),
    ))
}

/// Smallest level at which the start and the plus profile are joined
/// through profiles differing in one cell: states are added in order of
/// energy and merged with their active neighbours.
fn brute_force_bottleneck(u0: &GridProfile, tr: &ReducedTension, tq: &SurfaceTensionFn) -> Result<f64> {
    let free = u0.free_cells();
    let b = free.len();
    let n = 1usize << b;
    let u0p = PhaseProfile::Grid(u0.clone());
    let mut energy = Vec::with_capacity(n);
    let mut start = 0usize;
    for s in 0..n {
        let mut cells = vec![false; u0.n() * u0.n()];
        for (k, &c) in free.iter().enumerate() {
            cells[c] = s >> k & 1 == 1;
        }
        if cells == u0.cells() {
            start = s;
        }
        energy.push(surface_energy_reduced(&PhaseProfile::Grid(GridProfile::from_cells(u0.n(), u0.margin(), cells)?), &u0p, tr, tq)?);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &c| energy[a].total_cmp(&energy[c]));
    let mut uf = UnionFind::new(n);
    let mut active = vec![false; n];
    for &s in &order {
        active[s] = true;
        for k in 0..b {
            let t = s ^ (1 << k);
            if active[t] {
                uf.union(s, t);
            }
        }
        if active[start] && active[0] && uf.find(start) == uf.find(0) {
            return Ok(energy[s] - energy[start]);
        }
    }
    Err(Error::Numerical("profile graph is disconnected".into()))
}

fn square_barrier() -> Result<(bool, String)> {
    let start = Instant::now();
    let g0 = GridProfile::block(4, 0, 1, 1, 2)?;
    let u0 = PhaseProfile::Grid(g0.clone());
    let (tr, tq) = (ReducedTension::constant(0.5), SurfaceTensionFn::L1);
    let k = barrier_grid_minimax(&u0, &tr, &tq, 1)?.k_hat;
    let d = barrier_grid_minimax_dijkstra(&u0, &tr, &tq, 1)?.k_hat;
    let brute = brute_force_bottleneck(&g0, &tr, &tq)?;
    let closed = barrier_square(0.25, 0.5)?;
    let secs = start.elapsed().as_secs_f64();
    let pass = k == 0.25 && k == closed && d == k && (brute - k).abs() < 1e-12 && secs < 60.0;
    Ok((pass, format!("minimax {k}, dijkstra {d}, brute force {brute}, closed form {closed}, {secs:.2}s")))
}

fn constrained_square() -> Result<(bool, String)> {
    let c = constrained_barrier_square(0.5)?;
    let expected = 1.0 + (1.0 + 3f64.sqrt()) / 2.0;
    let pass = (c.value - expected).abs() < 1e-6 && (c.m0 - (1.0 - 3f64.sqrt())).abs() < 1e-6 && c.value < 2.5 && c.margin > 0.13;
    Ok((pass, format!("value {:.6} at m0 {:.6}, margin {:.4} below 1+3λ", c.value, c.m0, c.margin)))
}

fn enumerable_rectangles() -> Vec<Rectangle> {
    let mut out = Vec::new();
    for axis in 0..2 {
        for l in [1.0, 2.0, 3.0, 4.0] {
            for h in [0.5, 1.0, 1.5, 2.0] {
                if let Ok(r) = Rectangle::new(RectSpec::new(vec![0.0, 0.0], l, h, axis)) {
                    if (1..=22).contains(&r.num_edges()) {
                        out.push(r);
                    }
                }
            }
        }
    }
    out
}

fn tension_monotonicity() -> Result<(bool, String)> {
    let beta = 1.0;
    let rects = enumerable_rectangles();
    let mut violations = 0;
    let mut comparisons = 0;
    let mut zero_ok = true;
    for (i, r) in rects.iter().enumerate() {
        let cache = DisconnectionCache::new(r)?;
        let tau = |j: &[f64]| {
            let p: Vec<f64> = j.iter().map(|&x| edge_probability(beta, x)).collect();
            let phi = cache.probability(&p, 2.0);
            if phi >= 1.0 { 0.0 } else { -phi.ln() / r.section() }
        };
        let mut g = rng("tension", i as u64);
        let j: Vec<f64> = (0..r.num_edges()).map(|_| g.gen()).collect();
        let t0 = tau(&j);
        for e in 0..j.len() {
            let mut jj = j.clone();
            jj[e] *= g.gen::<f64>();
            comparisons += 1;
            if tau(&jj) > t0 + 1e-12 {
                violations += 1;
            }
        }
        zero_ok &= tau(&vec![0.0; r.num_edges()]) == 0.0;
    }
    // exact against Monte Carlo on small rectangles
    let mut worst_z: f64 = 0.0;
    for (i, spec) in [RectSpec::new(vec![0.5, 1.0], 2.0, 1.5, 1), RectSpec::new(vec![0.0, 0.0], 2.0, 1.0, 0)].into_iter().enumerate() {
        let r = Rectangle::new(spec)?;
        let j = vec![0.4; r.num_edges()];
        let exact = disconnection_prob(&r, &j, beta, EvalMode::Exact, &McBudget::default())?.prob;
        let budget = McBudget { replicas: 4000, sweeps: 60, seed: seeding::derive_seed(0xacce, "tension-mc", i as u64) };
        let mc = disconnection_prob(&r, &j, beta, EvalMode::MonteCarlo, &budget)?;
        let se = mc.stderr.max(1.0 / mc.samples as f64);
        worst_z = worst_z.max((mc.prob - exact).abs() / se);
    }
    let pass = violations == 0 && zero_ok && worst_z <= 4.0;
    Ok((
        pass,
        format!("{} rectangles, {violations}/{comparisons} monotonicity violations, J=0 gives 0: {zero_ok}, exact vs MC max |z| {worst_z:.2}", rects.len()),
    ))
}

/// Random grid profiles on an 8×8 grid with a one-cell plus margin.
pub fn fuzzed_profiles(count: usize, seed: u64) -> Result<Vec<GridProfile>> {
    (0..count as u64)
        .map(|k| {
            let mut g = seeding::stream(seed, "fuzzed-profile", k);
            let density = 0.1 + 0.8 * g.gen::<f64>();
            let mut p = GridProfile::plus(8, 1)?;
            for j in 1..7 {
                for i in 1..7 {
                    p.set(i, j, g.gen::<f64>() < density)?;
                }
            }
            Ok(p)
        })
        .collect()
}

fn geometry_identities() -> Result<(bool, String)> {
    let u0 = PhaseProfile::Grid(GridProfile::block(8, 1, 2, 2, 4)?);
    let (tr, tq) = (ReducedTension::constant(0.5), SurfaceTensionFn::L1);
    let profiles = fuzzed_profiles(100, 0xacce)?;
    let (mut literal, mut corrected, mut droplets) = (0, 0, 0);
    let mut worst_residual: f64 = 0.0;
    for p in &profiles {
        let u = PhaseProfile::Grid(p.clone());
        let d = decompose_symmetric(&u, &u0, &tr, &tq)?;
        literal += d.holds as usize;
        corrected += d.corrected_holds as usize;
        worst_residual = worst_residual.max(d.residual.abs());
        droplets += [0.25, 0.5].iter().map(|&h| decompose_droplets(&u, &u0, &tr, &tq, h)).collect::<Result<Vec<_>>>()?.iter().all(|x| x.holds)
            as usize;
    }
    let pass = literal == 100 && droplets == 100;
    Ok((
        pass,
        format!(
            "symmetric identity exact on {literal}/100 (max residual {worst_residual:.3}; with the anti-contact term {corrected}/100), droplet inequality on {droplets}/100"
        ),
    ))
}

fn dynamics() -> Result<(bool, String)> {
    // monotone coupling from the extremal starts
    let lattice = Arc::new(LatticeBox::symmetric(2, 1)?);
    let field = random_field(lattice.clone(), &mut rng("coupling", 0))?;
    let mut violations = 0;
    let mut events = 0;
    for (k, model) in [RateModel::heat_bath(0.8), RateModel::metropolis(0.8)].into_iter().enumerate() {
        let low = SpinConfig::constant(lattice.clone(), -1, Boundary::Plus)?;
        let high = SpinConfig::constant(lattice.clone(), 1, Boundary::Plus)?;
        let clock = model.clock(2, field.max_value())?;
        let t_end = 1e4 / (clock * lattice.len() as f64);
        let (a, b) = simulate_coupled(&field, &model, &low, &high, t_end, DynamicsSeed::new(0xacce, k as u64))?;
        let (mut x, mut y) = (low.clone(), high.clone());
        for (ea, eb) in a.events.iter().zip(&b.events) {
            x.set(ea.site, ea.spin_after);
            y.set(eb.site, eb.spin_after);
            violations += !x.le(&y) as usize;
        }
        events += a.events.len();
    }
    // attempted-event counts against Poisson(c t |Λ|)
    let small = Arc::new(LatticeBox::from_ranges(&[(0, 1), (0, 1)])?);
    let sfield = CouplingField::uniform(small.clone(), 1.0)?;
    let model = RateModel::metropolis(0.1);
    let clock = model.clock(2, 1.0)?;
    let t = 0.25;
    let sigma0 = SpinConfig::constant(small.clone(), 1, Boundary::Plus)?;
    let counts = (0..1000u64)
        .map(|r| simulate(&sfield, &model, &sigma0, t, DynamicsSeed::new(0xc0de, r)).map(|tr| tr.attempts() as u64))
        .collect::<Result<Vec<_>>>()?;
    let tv = poisson_tv(&counts, clock * t * small.len() as f64);
    // autocorrelation against the exact semigroup
    let field = random_field(small.clone(), &mut rng("autocorr", 0))?;
    let model = RateModel::heat_bath(0.8);
    let gen = ExactGenerator::new(&field, &model, Boundary::Plus)?;
    let pi0 = gen.spin_function(small.origin().expect("origin"));
    let times = [0.0, 0.25, 0.5, 1.0, 2.0];
    let mut worst_z: f64 = 0.0;
    for lambda in [1.0, 0.5] {
        let cfg = AutocorrelationConfig { starts: 4000, replicas: 4, seed: 0xacce, method: VarianceMethod::ReplicaPairs, exact_cap: 16, burn_in: 0.0 };
        let curve = estimate_autocorrelation(std::slice::from_ref(&field), &model, lambda, &times, &cfg)?;
        for p in &curve.points {
            if lambda != 1.0 && p.t > 0.0 {
                continue;
            }
            let exact = gen.variance(&gen.semigroup(&pi0, p.t)?).powf(lambda);
            let err = (p.estimate - exact).abs();
            let z = if err <= 1e-12 { 0.0 } else { err / p.stderr };
            worst_z = worst_z.max(z);
        }
    }
    let pass = violations == 0 && tv < 0.05 && worst_z <= 4.0;
    Ok((pass, format!("{events} coupled events, {violations} order violations; Poisson TV {tv:.4}; A(t) max |z| {worst_z:.2}")))
}

fn exponents() -> Result<(bool, String)> {
    let p0 = (-1.0f64).exp();
    let rate = RateFunctionModel::BernoulliBound { p_zero: p0, tau_min: 0.0, tau_q: 1.0 };
    let disk = Candidate {
        u0: PhaseProfile::disk([0.5, 0.5], 0.25),
        tau_r: ReducedTension::constant(0.5),
        tau_q: SurfaceTensionFn::isotropic(1.0),
        rate: rate.clone(),
        jump_cells: None,
    };
    let square = Candidate {
        u0: PhaseProfile::square([0.5, 0.5], 0.5),
        tau_r: ReducedTension::constant(0.5),
        tau_q: SurfaceTensionFn::L1,
        rate,
        jump_cells: None,
    };
    let r: f64 = 0.25;
    let hand_x = (8.0 * r * -p0.ln() + 2.0 * PI * r * 0.5) / (2.0 * r * ((1.0 - 0.25f64).sqrt() - 0.5 * 0.5f64.acos()));
    let x = exponent_xlambda(std::slice::from_ref(&disk), 1.0)?.value;
    let hand_kappa = 2.0 / ((8.0 * r * -p0.ln()) / (2.0 * r * (1.0 - 0.5)));
    let k = kappa(std::slice::from_ref(&square), 2)?;
    let pass = (x - hand_x).abs() < 1e-6 && (x - 16.27).abs() < 5e-3 && (k - hand_kappa).abs() < 1e-6 && (k - 0.25).abs() < 1e-6;
    Ok((pass, format!("X = {x:.7} (hand {hand_x:.7}), κ = {k:.7} (hand {hand_kappa:.7})")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids() {
        assert_eq!(criterion_index("6").unwrap(), 6);
        assert_eq!(criterion_index("square-barrier").unwrap(), 6);
        assert!(criterion_index("0").is_err() && criterion_index("12").is_err() && criterion_index("x").is_err());
    }

    #[test]
    fn fast_criteria() {
        for id in ["constrained-square", "exponents"] {
            let o = repro(id).unwrap();
            assert!(o.pass, "{o:?}");
        }
    }
}
