use std::fmt::Write as _;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::config::{ExperimentConfig, ExperimentKind};
use super::fit::{fit_power_law_with, Bootstrap, PowerLawFit};
use super::output::{csv_file, json_file, OutputFile, RunOutput};
use crate::barrier::{
    barrier_disk, barrier_grid_minimax, barrier_grid_minimax_dijkstra, barrier_square, evaluate_evolution, exponent_xlambda,
    kappa, surface_energy_reduced, EvolutionPath, EvolutionValue, Family, PhaseProfile, SurfaceTensionFn, XLambda,
};
use crate::cluster::{es_joint_exact, fk_exact, EdgeGraph, FkParams, Wiring};
use crate::dynamics::{
    check_rate_axioms, estimate_autocorrelation, exhaustive_probes, reversibility_defect, AutocorrelationConfig,
    AutocorrelationCurve, AxiomReport, CurvePoint,
};
use crate::model::{Boundary, CouplingField, CouplingLaw, DisorderSpec, GibbsTable, LatticeBox};
use crate::seeding::{self, derive_seed};
use crate::spectral::{generator_report, verify_lemma_f1, verify_variance_decay, ExactGenerator, SpectralReport};
use crate::tension::{dilution_event_check, estimate_quenched_tension, DilutionReport, McBudget, QuenchedConfig, Rectangle};
use crate::{Error, Result};

/// Exact-oracle agreement required by the check kinds.
const ORACLE_TOL: f64 = 1e-12;
const BARRIER_TOL: f64 = 1e-9;

/// Run an experiment on the current rayon pool.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    let cfg = config.clone().resolved()?;
    let out = match cfg.kind {
        ExperimentKind::Autocorr => autocorr(&cfg),
        ExperimentKind::SurfaceTension => surface_tension(&cfg),
        ExperimentKind::Dilution => dilution(&cfg),
        ExperimentKind::Gap => gap(&cfg),
        ExperimentKind::Barrier => barrier(&cfg),
        ExperimentKind::Xlambda => xlambda(&cfg),
        ExperimentKind::EsCheck => es_check(&cfg),
        ExperimentKind::AxiomCheck => axiom_check(&cfg),
        ExperimentKind::Compare => compare(&cfg),
    };
    out.map_err(|e| match e {
        Error::Capacity(m) => Error::Capacity(format!("{}: {m}", cfg.kind)),
        other => other,
    })
}

/// Run on a dedicated pool of `workers` threads. Results do not depend on
/// the number of workers: all aggregation is in task-index order.
pub fn run_with_workers(config: &ExperimentConfig, workers: usize) -> Result<RunOutput> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| run(config))
}

fn name(cfg: &ExperimentConfig, suffix: &str) -> String {
    format!("{}.{suffix}", cfg.prefix())
}

fn ensemble(cfg: &ExperimentConfig, law: &CouplingLaw, tag: &str) -> Result<Vec<CouplingField>> {
    let lattice = cfg.model.lattice()?;
    (0..cfg.schedule.disorders as u64)
        .map(|i| {
            let spec = DisorderSpec { law: law.clone(), seed: derive_seed(cfg.seeds.disorder, tag, i) };
            CouplingField::sample(lattice.clone(), &spec)
        })
        .collect()
}

/// Clock intensity per site: a sweep (`|Λ|` attempts) lasts `1/clock`.
fn sweep_clock(cfg: &ExperimentConfig, law: &CouplingLaw) -> Result<f64> {
    let j_max = DisorderSpec { law: law.clone(), seed: 0 }.j_max();
    cfg.model.rate_model().clock(cfg.model.dimension(), j_max)
}

fn curve_csv(curve: &AutocorrelationCurve, sweeps: &[f64]) -> String {
    let mut out = String::from("sweeps,t,estimate,stderr,replicas\n");
    for (p, w) in curve.points.iter().zip(sweeps) {
        let _ = writeln!(out, "{w},{},{},{},{}", p.t, p.estimate, p.stderr, p.replicas);
    }
    out
}

fn autocorr_curve(cfg: &ExperimentConfig, law: &CouplingLaw, tag: &str) -> Result<(AutocorrelationCurve, f64)> {
    let s = &cfg.schedule;
    let fields = ensemble(cfg, law, tag)?;
    let clock = sweep_clock(cfg, law)?;
    let times: Vec<f64> = s.times.iter().map(|w| w / clock).collect();
    let acfg = AutocorrelationConfig {
        starts: s.starts,
        replicas: s.replicas,
        seed: derive_seed(cfg.seeds.master, tag, 0),
        method: s.method,
        exact_cap: s.exact_cap,
        burn_in: s.burn_in,
    };
    Ok((estimate_autocorrelation(&fields, &cfg.model.rate_model(), s.lambda, &times, &acfg)?, clock))
}

/// Power-law fit with `t` measured in sweeps.
fn fit_in_sweeps(cfg: &ExperimentConfig, curve: &AutocorrelationCurve) -> Option<std::result::Result<PowerLawFit, String>> {
    let window = cfg.schedule.fit_window?;
    let pts: Vec<CurvePoint> =
        curve.points.iter().zip(&cfg.schedule.times).map(|(p, &w)| CurvePoint { t: w, ..p.clone() }).collect();
    let boot = Bootstrap { resamples: cfg.schedule.bootstrap, seed: derive_seed(cfg.seeds.master, "fit", 0) };
    Some(fit_power_law_with(&pts, window, &boot).map_err(|e| e.to_string()))
}

#[derive(Serialize)]
struct AutocorrReport<'a> {
    label: &'static str,
    lambda: f64,
    clock: f64,
    burn_in: &'a [Option<f64>],
    finite_volume_proxy: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit: Option<PowerLawFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit_error: Option<String>,
}

fn autocorr(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let (curve, clock) = autocorr_curve(cfg, &cfg.model.disorder, "disorder")?;
    let (fit, fit_error) = match fit_in_sweeps(cfg, &curve) {
        Some(Ok(f)) => (Some(f), None),
        Some(Err(e)) => (None, Some(e)),
        None => (None, None),
    };
    let report = AutocorrReport {
        label: "finite-volume estimate",
        lambda: curve.lambda,
        clock,
        burn_in: &curve.burn_in,
        finite_volume_proxy: curve.finite_volume_proxy,
        fit,
        fit_error,
    };
    let headline = json!({
        "final": curve.points.last().map(|p| (p.estimate, p.stderr)),
        "exponent": report.fit.as_ref().map(|f| f.exponent),
    });
    let files = vec![
        csv_file(cfg, &name(cfg, "curve.csv"), &curve_csv(&curve, &cfg.schedule.times)),
        json_file(cfg, &name(cfg, "report.json"), &report)?,
    ];
    Ok(RunOutput::new(cfg.clone(), files, true, headline))
}

/// Paired curves of the pure and dilute laws and the one-sided ordering
/// test at the largest common time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    /// Schedule in sweeps, shared by both arms.
    pub sweeps: Vec<f64>,
    pub pure: AutocorrelationCurve,
    pub dilute: AutocorrelationCurve,
    /// Largest common time, in sweeps.
    pub t_common: f64,
    /// Dilute minus pure estimate at `t_common`.
    pub difference: f64,
    /// Combined standard error of the difference.
    pub sigma: f64,
    pub z: f64,
    /// `difference > 2σ`.
    pub dilute_above: bool,
    /// `|difference| ≤ 2σ`.
    pub indistinguishable: bool,
}

/// The arms use independent disorder and dynamics streams. The report is
/// a finite-size observation, not an asymptotic statement.
pub fn compare_dilute_vs_pure(config: &ExperimentConfig) -> Result<CompareReport> {
    let cfg = config.clone().resolved()?;
    let arms = cfg.compare.as_ref().ok_or_else(|| Error::Config("missing `compare` section".into()))?;
    let (pure, _) = autocorr_curve(&cfg, &arms.pure, "pure")?;
    let (dilute, _) = autocorr_curve(&cfg, &arms.dilute, "dilute")?;
    let (p, d) = (pure.points.last().expect("times"), dilute.points.last().expect("times"));
    let difference = d.estimate - p.estimate;
    let sigma = (p.stderr.powi(2) + d.stderr.powi(2)).sqrt();
    let z = if sigma > 0.0 {
        difference / sigma
    } else if difference == 0.0 {
        0.0
    } else {
        difference.signum() * f64::INFINITY
    };
    Ok(CompareReport {
        sweeps: cfg.schedule.times.clone(),
        t_common: *cfg.schedule.times.last().expect("times"),
        pure,
        dilute,
        difference,
        sigma,
        z,
        dilute_above: difference > 2.0 * sigma,
        indistinguishable: difference.abs() <= 2.0 * sigma,
    })
}

fn compare(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let r = compare_dilute_vs_pure(cfg)?;
    let headline = json!({ "dilute_above": r.dilute_above, "z": r.z, "t_common": r.t_common });
    let files = vec![
        csv_file(cfg, &name(cfg, "pure.csv"), &curve_csv(&r.pure, &r.sweeps)),
        csv_file(cfg, &name(cfg, "dilute.csv"), &curve_csv(&r.dilute, &r.sweeps)),
        json_file(cfg, &name(cfg, "report.json"), &r)?,
    ];
    Ok(RunOutput::new(cfg.clone(), files, true, headline))
}

fn surface_tension(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let t = cfg.tension.as_ref().expect("resolved");
    let qc = QuenchedConfig {
        dim: cfg.model.dimension(),
        axis: t.axis,
        beta: cfg.model.beta,
        sizes: cfg.schedule.sizes.clone(),
        replicas: cfg.schedule.replicas,
        delta: t.delta,
        mode: t.mode,
        budget: McBudget { seed: derive_seed(cfg.seeds.master, "tension", t.budget.seed), ..t.budget },
    };
    let table = estimate_quenched_tension(&qc, &cfg.model.disorder_spec(cfg.seeds.disorder))?;
    let report = json!({ "label": table.label, "monotone_trend": table.monotone_trend, "summary": table.summary });
    let headline = json!({ "mean_tau": table.summary.iter().map(|s| s.mean_tau).collect::<Vec<_>>() });
    let files =
        vec![csv_file(cfg, &name(cfg, "table.csv"), &table.to_csv()), json_file(cfg, &name(cfg, "report.json"), &report)?];
    Ok(RunOutput::new(cfg.clone(), files, true, headline))
}

fn dilution(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let t = cfg.tension.as_ref().expect("resolved");
    let d = cfg.dilution.as_ref().expect("resolved");
    let rects = d.rects.iter().cloned().map(Rectangle::new).collect::<Result<Vec<_>>>()?;
    let sites = rects.iter().flat_map(|r| r.sites().iter().cloned()).collect();
    let lattice = Arc::new(LatticeBox::from_sites(cfg.model.dimension(), sites)?);
    let field = CouplingField::sample(lattice, &cfg.model.disorder_spec(cfg.seeds.disorder))?;
    let budget = McBudget { seed: derive_seed(cfg.seeds.master, "dilution", t.budget.seed), ..t.budget };
    let report: DilutionReport = dilution_event_check(&field, &rects, &d.thresholds, cfg.model.beta, t.mode, &budget)?;
    let headline = json!({ "event_holds": report.holds });
    let files = vec![json_file(cfg, &name(cfg, "report.json"), &report)?];
    Ok(RunOutput::new(cfg.clone(), files, true, headline))
}

#[derive(Serialize)]
struct GapEntry {
    disorder: usize,
    generator: SpectralReport,
    decay: SpectralReport,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    plus_state: Vec<SpectralReport>,
    pass: bool,
}

fn gap(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let model = cfg.model.rate_model();
    let clock = sweep_clock(cfg, &cfg.model.disorder)?;
    let times: Vec<f64> = cfg.schedule.times.iter().map(|w| w / clock).collect();
    let mut entries = Vec::new();
    for (i, field) in ensemble(cfg, &cfg.model.disorder, "disorder")?.iter().enumerate() {
        let gen = ExactGenerator::new(field, &model, cfg.model.boundary.clone())?;
        let origin = field.lattice().origin().expect("validated");
        let generator = generator_report(&gen)?;
        let decay = verify_variance_decay(&gen, &gen.spin_function(origin), &times)?;
        let plus_state = if cfg.model.boundary == Boundary::Plus {
            times.iter().map(|&t| verify_lemma_f1(field, &model, t)).collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        let pass = generator.pass() && decay.pass() && plus_state.iter().all(|r| r.pass());
        entries.push(GapEntry { disorder: i, generator, decay, plus_state, pass });
    }
    let pass = entries.iter().all(|e| e.pass);
    let headline = json!({ "gaps": entries.iter().map(|e| e.generator.gap).collect::<Vec<_>>() });
    let files = vec![json_file(cfg, &name(cfg, "report.json"), &json!({ "clock": clock, "entries": entries }))?];
    Ok(RunOutput::new(cfg.clone(), files, pass, headline))
}

/// Barrier of one initial profile by every applicable route.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarrierReport {
    pub f_start: f64,
    /// Closed form (disk with `τ^q ≡ 1`, square with `ℓ¹` tension,
    /// constant `τ^r`).
    pub closed_form: Option<f64>,
    /// Supremum along the built-in one-parameter family.
    pub parametric: Option<EvolutionValue>,
    /// Value along the configured explicit path.
    pub path: Option<EvolutionValue>,
    pub grid: Option<GridReport>,
    /// `|closed_form − parametric|` when both exist.
    pub difference: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub k_hat: f64,
    pub bottleneck: f64,
    pub jump_cells: usize,
    pub states: usize,
    pub dijkstra_k_hat: f64,
    pub witness: Vec<PhaseProfile>,
}

fn barrier(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let b = cfg.barrier.as_ref().expect("resolved");
    let (u0, tr, tq) = (&b.u0, &b.tau_r, &b.tau_q);
    let constant = tr.patches.is_empty();
    let f_start = surface_energy_reduced(u0, u0, tr, tq)?;
    let (closed_form, family) = match *u0 {
        PhaseProfile::Disk { center, radius } => {
            let c = (constant && *tq == SurfaceTensionFn::isotropic(1.0)).then(|| barrier_disk(radius, tr.lambda)).transpose()?;
            (c, Some(Family::ChordSweep { center, radius }))
        }
        PhaseProfile::Square { center, side } => {
            let c = (constant && *tq == SurfaceTensionFn::L1).then(|| barrier_square(side / 2.0, tr.lambda)).transpose()?;
            (c, Some(Family::FlatFront { center, side }))
        }
        _ => (None, None),
    };
    let parametric =
        family.map(|family| evaluate_evolution(&EvolutionPath::Continuous { family }, u0, tr, tq)).transpose()?;
    let path = b.path.as_ref().map(|p| evaluate_evolution(p, u0, tr, tq)).transpose()?;
    let grid = if u0.is_grid() {
        let k = b.jump_cells.unwrap_or(1);
        let g = barrier_grid_minimax(u0, tr, tq, k)?;
        let d = barrier_grid_minimax_dijkstra(u0, tr, tq, k)?;
        Some(GridReport {
            k_hat: g.k_hat,
            bottleneck: g.bottleneck,
            jump_cells: k,
            states: g.states,
            dijkstra_k_hat: d.k_hat,
            witness: g.path.into_iter().map(PhaseProfile::Grid).collect(),
        })
    } else {
        None
    };
    let difference = match (closed_form, &parametric) {
        (Some(c), Some(p)) => Some((c - p.k_contribution).abs()),
        _ => None,
    };
    let pass = difference.map_or(true, |d| d < BARRIER_TOL) && grid.as_ref().map_or(true, |g| g.k_hat == g.dijkstra_k_hat);
    let report = BarrierReport { f_start, closed_form, parametric, path, grid, difference, pass };
    let headline = json!({
        "closed_form": report.closed_form,
        "parametric": report.parametric.map(|p| p.k_contribution),
        "grid": report.grid.as_ref().map(|g| g.k_hat),
    });
    let files = vec![json_file(cfg, &name(cfg, "report.json"), &report)?];
    Ok(RunOutput::new(cfg.clone(), files, pass, headline))
}

#[derive(Serialize)]
struct XLambdaReport {
    lambda: f64,
    /// Upper bound on the exponent over the supplied candidates.
    xlambda: XLambda,
    x0: f64,
    kappa: f64,
    dim: usize,
}

fn xlambda(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let p = cfg.xlambda.as_ref().expect("resolved");
    let dim = cfg.model.dimension();
    let x = exponent_xlambda(&p.candidates, p.lambda)?;
    let x0 = exponent_xlambda(&p.candidates, 0.0)?.value;
    let k = kappa(&p.candidates, dim)?;
    let headline = json!({ "xlambda": x.value, "kappa": k });
    let report = XLambdaReport { lambda: p.lambda, xlambda: x, x0, kappa: k, dim };
    let files = vec![json_file(cfg, &name(cfg, "report.json"), &report)?];
    Ok(RunOutput::new(cfg.clone(), files, true, headline))
}

/// Every box shape `a_1 × … × a_d` with at most `max` sites.
pub fn box_shapes(dim: usize, max: usize) -> Vec<Vec<usize>> {
    fn rec(dim: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == dim {
            out.push(cur.clone());
            return;
        }
        for a in 1..=left {
            cur.push(a);
            rec(dim, left / a, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, max, &mut Vec::new(), &mut out);
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EsEntry {
    pub shape: Vec<usize>,
    pub beta: f64,
    pub sigma_error: f64,
    pub omega_error: f64,
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Edwards–Sokal marginals against the Gibbs table and the wired FK
/// table (`q = 2`) on every small box.
pub fn es_marginal_errors(
    dim: usize,
    max_sites: usize,
    draws: usize,
    beta_range: (f64, f64),
    law: Option<&CouplingLaw>,
    seed: u64,
) -> Result<Vec<EsEntry>> {
    let mut out = Vec::new();
    for (bi, shape) in box_shapes(dim, max_sites).into_iter().enumerate() {
        let ranges: Vec<(i64, i64)> = shape.iter().map(|&a| (0, a as i64 - 1)).collect();
        let lattice = Arc::new(LatticeBox::from_ranges(&ranges)?);
        for k in 0..draws as u64 {
            let idx = (bi as u64) << 32 | k;
            let mut rng = seeding::stream(seed, "es-check", idx);
            let beta = beta_range.0 + (beta_range.1 - beta_range.0) * rng.gen::<f64>();
            let field = match law {
                None => CouplingField::from_values(lattice.clone(), (0..lattice.edges().len()).map(|_| rng.gen()).collect())?,
                Some(l) => CouplingField::sample(
                    lattice.clone(),
                    &DisorderSpec { law: l.clone(), seed: derive_seed(seed, "es-disorder", idx) },
                )?,
            };
            let es = es_joint_exact(&field, beta)?;
            let gibbs = GibbsTable::new(&field, beta, Boundary::Plus)?;
            let fk = fk_exact(&EdgeGraph::closed(&lattice), &FkParams::from_field(&field, beta, 2.0)?, &Wiring::Wired)?;
            out.push(EsEntry {
                shape: shape.clone(),
                beta,
                sigma_error: max_abs_diff(&es.sigma_marginal(), gibbs.probs()),
                omega_error: max_abs_diff(&es.omega_marginal(), &fk.probs),
            });
        }
    }
    Ok(out)
}

fn es_check(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let e = cfg.es.as_ref().expect("resolved");
    let law = (!e.uniform_couplings).then_some(&cfg.model.disorder);
    let entries = es_marginal_errors(cfg.model.dimension(), e.max_sites, e.draws, e.beta_range, law, cfg.seeds.master)?;
    let worst = entries.iter().fold(0.0f64, |m, x| m.max(x.sigma_error).max(x.omega_error));
    let pass = worst < ORACLE_TOL;
    let headline = json!({ "max_error": worst, "cases": entries.len() });
    let files = vec![json_file(cfg, &name(cfg, "report.json"), &json!({ "max_error": worst, "entries": entries }))?];
    Ok(RunOutput::new(cfg.clone(), files, pass, headline))
}

#[derive(Serialize)]
struct AxiomCheckReport {
    axioms: AxiomReport,
    reversibility_defect: f64,
    stationarity_defect: f64,
    probes: usize,
}

fn axiom_check(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let model = cfg.model.rate_model();
    let lattice = cfg.model.lattice()?;
    let field = CouplingField::sample(lattice, &cfg.model.disorder_spec(cfg.seeds.disorder))?;
    let boundary = cfg.model.boundary.clone();
    let probes = exhaustive_probes(&field, boundary.clone())?;
    let axioms = check_rate_axioms(&model, &probes);
    let table = GibbsTable::new(&field, model.beta, boundary.clone())?;
    let reversibility = reversibility_defect(&model, &field, &table);
    let stationarity = ExactGenerator::new(&field, &model, boundary)?.stationarity_defect();
    let pass = axioms.pass() && reversibility <= ORACLE_TOL && stationarity <= ORACLE_TOL;
    let headline = json!({ "failed": axioms.results.iter().filter(|r| !r.pass).map(|r| r.axiom.clone()).collect::<Vec<_>>() });
    let report =
        AxiomCheckReport { axioms, reversibility_defect: reversibility, stationarity_defect: stationarity, probes: probes.len() };
    let files: Vec<OutputFile> = vec![json_file(cfg, &name(cfg, "report.json"), &report)?];
    Ok(RunOutput::new(cfg.clone(), files, pass, headline))
}
