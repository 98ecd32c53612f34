use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::barrier::{Candidate, EvolutionPath, PhaseProfile, ReducedTension, SurfaceTensionFn};
use crate::dynamics::{RateKind, RateModel, VarianceMethod};
use crate::model::{Boundary, CouplingLaw, DisorderSpec, LatticeBox};
use crate::tension::{EvalMode, McBudget, RateFunctionModel, RectSpec};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Autocorr,
    SurfaceTension,
    Dilution,
    Gap,
    Barrier,
    Xlambda,
    EsCheck,
    AxiomCheck,
    /// Paired autocorrelation curves for a pure and a dilute law.
    Compare,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::Autocorr,
        ExperimentKind::SurfaceTension,
        ExperimentKind::Dilution,
        ExperimentKind::Gap,
        ExperimentKind::Barrier,
        ExperimentKind::Xlambda,
        ExperimentKind::EsCheck,
        ExperimentKind::AxiomCheck,
        ExperimentKind::Compare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Autocorr => "autocorr",
            ExperimentKind::SurfaceTension => "surface-tension",
            ExperimentKind::Dilution => "dilution",
            ExperimentKind::Gap => "gap",
            ExperimentKind::Barrier => "barrier",
            ExperimentKind::Xlambda => "xlambda",
            ExperimentKind::EsCheck => "es-check",
            ExperimentKind::AxiomCheck => "axiom-check",
            ExperimentKind::Compare => "compare",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment kind `{s}`")))
    }
}

/// Lattice, temperature, dynamics and disorder law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    pub dim: usize,
    /// Half-side of the symmetric box `{-n, …, n}^d`.
    pub n: usize,
    /// Explicit inclusive ranges; overrides `dim` and `n`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ranges: Option<Vec<(i64, i64)>>,
    pub beta: f64,
    pub rates: RateKind,
    pub disorder: CouplingLaw,
    pub boundary: Boundary,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            dim: 2,
            n: 1,
            ranges: None,
            beta: 1.0,
            rates: RateKind::HeatBath,
            disorder: CouplingLaw::Constant { value: 1.0 },
            boundary: Boundary::Plus,
        }
    }
}

impl ModelParams {
    pub fn lattice(&self) -> Result<Arc<LatticeBox>> {
        Ok(Arc::new(match &self.ranges {
            Some(r) => LatticeBox::from_ranges(r)?,
            None => LatticeBox::symmetric(self.dim, self.n)?,
        }))
    }

    pub fn rate_model(&self) -> RateModel {
        RateModel { kind: self.rates.clone(), beta: self.beta }
    }

    pub fn dimension(&self) -> usize {
        self.ranges.as_ref().map_or(self.dim, |r| r.len())
    }

    pub fn disorder_spec(&self, seed: u64) -> DisorderSpec {
        DisorderSpec { law: self.disorder.clone(), seed }
    }
}

/// Times are in sweeps: one sweep is `|Λ|` attempted updates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Schedule {
    pub times: Vec<f64>,
    /// Rectangle sizes `L` for surface-tension runs.
    pub sizes: Vec<f64>,
    /// Replicas per equilibrium start (autocorrelation) or disorder
    /// replicas per size (surface tension).
    pub replicas: usize,
    /// Disorder samples in the ensemble.
    pub disorders: usize,
    pub starts: usize,
    pub method: VarianceMethod,
    /// Power `λ` in `A^λ(t)`.
    pub lambda: f64,
    pub exact_cap: usize,
    /// Burn-in, in sweeps, for boxes sampled by dynamics.
    pub burn_in: f64,
    /// Power-law fit window in sweeps.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<(f64, f64)>,
    pub bootstrap: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            times: vec![0.0, 0.25, 0.5, 1.0, 2.0],
            sizes: vec![3.0, 5.0],
            replicas: 4,
            disorders: 4,
            starts: 64,
            method: VarianceMethod::ReplicaPairs,
            lambda: 1.0,
            exact_cap: 16,
            burn_in: 200.0,
            fit_window: None,
            bootstrap: 400,
        }
    }
}

/// Master seed for dynamics and Monte Carlo, and a separate seed for the
/// disorder, so a fixed disorder can be rerun with fresh dynamics.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Seeds {
    pub master: u64,
    pub disorder: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds { master: 1, disorder: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: String,
    /// File-name prefix; the kind name when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prefix: Option<String>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: "out".into(), prefix: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TensionParams {
    pub axis: usize,
    pub delta: f64,
    pub mode: EvalMode,
    pub budget: McBudget,
}

impl Default for TensionParams {
    fn default() -> Self {
        TensionParams { axis: 0, delta: 0.5, mode: EvalMode::Auto, budget: McBudget { replicas: 400, sweeps: 50, seed: 0 } }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DilutionParams {
    pub rects: Vec<RectSpec>,
    pub thresholds: Vec<f64>,
}

impl Default for DilutionParams {
    fn default() -> Self {
        DilutionParams {
            rects: vec![RectSpec::new(vec![-2.5, 0.0], 2.0, 1.0, 0), RectSpec::new(vec![2.5, 0.0], 2.0, 1.0, 0)],
            thresholds: vec![0.5, 0.5],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BarrierParams {
    pub u0: PhaseProfile,
    pub tau_r: ReducedTension,
    pub tau_q: SurfaceTensionFn,
    /// Jump size for the grid search (grid profiles only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jump_cells: Option<usize>,
    /// Explicit evolution to evaluate; the built-in family otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<EvolutionPath>,
}

impl Default for BarrierParams {
    fn default() -> Self {
        BarrierParams {
            u0: PhaseProfile::disk([0.5, 0.5], 0.25),
            tau_r: ReducedTension::constant(0.5),
            tau_q: SurfaceTensionFn::isotropic(1.0),
            jump_cells: None,
            path: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct XLambdaParams {
    pub candidates: Vec<Candidate>,
    pub lambda: f64,
}

impl Default for XLambdaParams {
    fn default() -> Self {
        let rate = RateFunctionModel::BernoulliBound { p_zero: (-1.0f64).exp(), tau_min: 0.0, tau_q: 1.0 };
        XLambdaParams {
            candidates: vec![
                Candidate {
                    u0: PhaseProfile::disk([0.5, 0.5], 0.25),
                    tau_r: ReducedTension::constant(0.5),
                    tau_q: SurfaceTensionFn::isotropic(1.0),
                    rate: rate.clone(),
                    jump_cells: None,
                },
                Candidate {
                    u0: PhaseProfile::square([0.5, 0.5], 0.5),
                    tau_r: ReducedTension::constant(0.5),
                    tau_q: SurfaceTensionFn::L1,
                    rate,
                    jump_cells: None,
                },
            ],
            lambda: 1.0,
        }
    }
}

/// Edwards–Sokal check on every `d = 2` box with at most `max_sites`
/// sites, `draws` random `(J, β)` per box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EsParams {
    pub max_sites: usize,
    pub draws: usize,
    pub beta_range: (f64, f64),
    /// `J_e ~ U[0,1]` when true, the model's coupling law otherwise.
    pub uniform_couplings: bool,
}

impl Default for EsParams {
    fn default() -> Self {
        EsParams { max_sites: 4, draws: 5, beta_range: (0.1, 2.0), uniform_couplings: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareParams {
    pub pure: CouplingLaw,
    pub dilute: CouplingLaw,
}

impl Default for CompareParams {
    fn default() -> Self {
        CompareParams { pure: CouplingLaw::Constant { value: 1.0 }, dilute: CouplingLaw::Bernoulli { p_zero: 0.15 } }
    }
}

/// A complete experiment description. Sections not used by the kind must
/// be absent; the resolved form fills in defaults for the ones it uses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub model: ModelParams,
    #[serde(default)]
    pub schedule: Schedule,
    #[serde(default)]
    pub seeds: Seeds,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tension: Option<TensionParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dilution: Option<DilutionParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub barrier: Option<BarrierParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xlambda: Option<XLambdaParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub es: Option<EsParams>,
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(msg()))
    }
}

fn finite_nonneg(x: f64) -> bool {
    x.is_finite() && x >= 0.0
}

impl ExperimentConfig {
    /// Default configuration of a kind, already resolved.
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            model: ModelParams::default(),
            schedule: Schedule::default(),
            seeds: Seeds::default(),
            output: OutputSpec::default(),
            tension: None,
            dilution: None,
            barrier: None,
            xlambda: None,
            compare: None,
            es: None,
        }
        .resolved()
        .expect("defaults are valid")
    }

    fn sections(&self) -> [(&'static str, bool, &'static [ExperimentKind]); 6] {
        use ExperimentKind::*;
        [
            ("tension", self.tension.is_some(), &[SurfaceTension, Dilution]),
            ("dilution", self.dilution.is_some(), &[Dilution]),
            ("barrier", self.barrier.is_some(), &[Barrier]),
            ("xlambda", self.xlambda.is_some(), &[Xlambda]),
            ("compare", self.compare.is_some(), &[Compare]),
            ("es", self.es.is_some(), &[EsCheck]),
        ]
    }

    /// Fill in the kind's sections and validate.
    pub fn resolved(mut self) -> Result<Self> {
        for (name, present, kinds) in self.sections() {
            check(!present || kinds.contains(&self.kind), || format!("section `{name}` is not used by kind `{}`", self.kind))?;
        }
        use ExperimentKind::*;
        match self.kind {
            SurfaceTension => {
                self.tension.get_or_insert_with(TensionParams::default);
            }
            Dilution => {
                self.tension.get_or_insert_with(TensionParams::default);
                self.dilution.get_or_insert_with(DilutionParams::default);
            }
            Barrier => {
                self.barrier.get_or_insert_with(BarrierParams::default);
            }
            Xlambda => {
                self.xlambda.get_or_insert_with(XLambdaParams::default);
            }
            Compare => {
                self.compare.get_or_insert_with(CompareParams::default);
            }
            EsCheck => {
                self.es.get_or_insert_with(EsParams::default);
            }
            _ => {}
        }
        self.validate()?;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seeds.master = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        let s = &self.schedule;
        check(finite_nonneg(m.beta), || format!("beta = {} must be finite and >= 0", m.beta))?;
        check((1..=3).contains(&m.dimension()), || format!("dimension {} must be 1, 2 or 3", m.dimension()))?;
        m.rate_model().validate().map_err(|e| Error::Config(e.to_string()))?;
        m.disorder_spec(0).validate()?;
        let lattice = m.lattice().map_err(|e| Error::Config(e.to_string()))?;
        if let Boundary::Frozen(v) = &m.boundary {
            check(v.len() == lattice.exterior().len(), || "frozen boundary has the wrong length".into())?;
            check(v.iter().all(|&x| x == 1 || x == -1), || "frozen boundary spins must be ±1".into())?;
        }
        check(s.times.iter().all(|&t| finite_nonneg(t)), || "times must be finite and >= 0".into())?;
        check(s.times.windows(2).all(|w| w[0] < w[1]), || "times must be strictly increasing".into())?;
        check(finite_nonneg(s.burn_in), || "burn-in must be finite and >= 0".into())?;
        check(s.lambda > 0.0 && s.lambda.is_finite(), || format!("lambda = {} must be positive", s.lambda))?;
        check(!self.output.dir.is_empty(), || "output dir must not be empty".into())?;
        if let Some(p) = &self.output.prefix {
            let ok = !p.is_empty() && p.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c));
            check(ok && !p.starts_with('.'), || format!("output prefix `{p}` must be a plain file-name stem"))?;
        }
        use ExperimentKind::*;
        match self.kind {
            Autocorr | Compare => {
                check(!s.times.is_empty(), || "the schedule needs at least one time".into())?;
                check(s.disorders >= 1, || "at least one disorder sample is needed".into())?;
                check(s.starts >= 2, || "at least two equilibrium starts are needed".into())?;
                check(s.method == VarianceMethod::TwoTime || s.replicas >= 2, || "replica pairs need two replicas".into())?;
                check(lattice.origin().is_some(), || "the box must contain the origin".into())?;
                check(m.boundary == Boundary::Plus, || "autocorrelation runs use the plus boundary".into())?;
                if let Some((a, b)) = s.fit_window {
                    let (lo, hi) = (s.times[0], s.times[s.times.len() - 1]);
                    check(a > 0.0 && a < b, || format!("fit window ({a}, {b}) must satisfy 0 < a < b"))?;
                    check(lo <= a && b <= hi, || format!("fit window ({a}, {b}) outside the schedule [{lo}, {hi}]"))?;
                }
                if let Some(c) = &self.compare {
                    DisorderSpec { law: c.pure.clone(), seed: 0 }.validate()?;
                    DisorderSpec { law: c.dilute.clone(), seed: 0 }.validate()?;
                }
            }
            SurfaceTension => {
                check(!s.sizes.is_empty(), || "the schedule needs at least one size".into())?;
                check(s.sizes.iter().all(|&l| l > 0.0 && l.is_finite()), || "sizes must be positive".into())?;
                check(s.replicas >= 1, || "at least one disorder replica is needed".into())?;
            }
            Gap => {
                check(lattice.origin().is_some(), || "the box must contain the origin".into())?;
            }
            _ => {}
        }
        if let Some(t) = &self.tension {
            check(t.axis < m.dimension(), || format!("axis {} out of range", t.axis))?;
            check(t.delta > 0.0 && t.delta.is_finite(), || "delta must be positive".into())?;
            check(t.budget.replicas >= 1, || "the Monte Carlo budget needs replicas".into())?;
        }
        if let Some(d) = &self.dilution {
            check(!d.rects.is_empty(), || "at least one rectangle is needed".into())?;
            check(d.rects.len() == d.thresholds.len(), || "one threshold per rectangle".into())?;
            check(d.rects.iter().all(|r| r.dim() == m.dimension()), || "rectangle dimension differs from the model".into())?;
        }
        if let Some(e) = &self.es {
            let (lo, hi) = e.beta_range;
            check(finite_nonneg(lo) && hi.is_finite() && lo <= hi, || "beta_range must satisfy 0 <= lo <= hi".into())?;
            check((1..=8).contains(&e.max_sites), || "es.max_sites must lie in 1..=8".into())?;
            check(e.draws >= 1, || "es.draws must be at least 1".into())?;
        }
        if let Some(b) = &self.barrier {
            b.u0.validate()?;
            b.tau_r.validate(&b.u0, &b.tau_q)?;
            if let Some(p) = &b.path {
                p.validate(&b.u0)?;
            }
            check(b.jump_cells != Some(0), || "jump_cells must be at least 1".into())?;
        }
        if let Some(x) = &self.xlambda {
            check(finite_nonneg(x.lambda), || "xlambda.lambda must be finite and >= 0".into())?;
            for c in &x.candidates {
                c.u0.validate()?;
                c.tau_r.validate(&c.u0, &c.tau_q)?;
                c.rate.validate()?;
            }
        }
        Ok(())
    }

    pub fn prefix(&self) -> &str {
        self.output.prefix.as_deref().unwrap_or(self.kind.name())
    }

    /// Canonical JSON of the configuration.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Parse a JSON configuration: syntax, schema and semantic checks.
/// Returns the resolved configuration.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let raw: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    raw.resolved()
}

/// Same as [`parse_config`]: a valid configuration resolves, anything else
/// is reported as a configuration error.
pub fn validate_config(text: &str) -> Result<ExperimentConfig> {
    parse_config(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        for kind in ExperimentKind::ALL {
            let c = ExperimentConfig::new(kind);
            let back = parse_config(&c.to_json()).unwrap();
            assert_eq!(back, c);
            assert_eq!(kind.name().parse::<ExperimentKind>().unwrap(), kind);
        }
    }

    #[test]
    fn minimal_and_rejected() {
        let c = parse_config(r#"{"kind":"barrier"}"#).unwrap();
        assert!(c.barrier.is_some() && c.tension.is_none());
        for bad in [
            r#"{"kind":"barrier","extra":1}"#,
            r#"{"kind":"gap","barrier":{}}"#,
            r#"{"kind":"nope"}"#,
            r#"{"kind":"autocorr","schedule":{"times":[1,0.5]}}"#,
            r#"{"kind":"autocorr","schedule":{"fit_window":[0.5,9]}}"#,
            r#"{"kind":"gap","model":{"beta":-1}}"#,
            r#"{"kind":"gap","output":{"prefix":"../x"}}"#,
            r#"{"kind":"gap","model":{"disorder":{"kind":"bernoulli","p_zero":2}}}"#,
        ] {
            assert!(matches!(parse_config(bad), Err(Error::Config(_))), "{bad}");
        }
        assert!(parse_config(r#"{"kind":"barrier","barrier":{"tau_r":{"lambda":2}}}"#).is_err());
    }
}
