//! Run configuration, the JSON report, command entry points and SVG output.
//!
//! Exact integers (functionals, witnesses) are written as decimal strings and complex
//! numbers as `[re, im]`. Reports carry `"schema": 1`; every numerical field is a pure
//! function of the input and the configuration unless timings are requested.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_bigint::BigInt;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::mixed_poly::MixedPolynomial;
use crate::newton::{self, Face};
use crate::nondeg::{self, CriticalWitness, NondegMode, NondegOptions, SearchBudget, VerdictStatus};
use crate::parser::{self, ParseError, SourceExpr};
use crate::probe::{self, Classification, CriticalValueSet, ProbeOptions, ProbeResult, RadiusSchedule, ValueCluster};
use crate::Error;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_NAME: &str = "mixbif";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Drift below this counts as a constant chain for the `Σ∞` diagnostic.
const CONSTANT_DRIFT: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub tol: f64,
    pub cluster_tol: f64,
    pub value_tol: f64,
    pub torus_margin: f64,
    pub kos_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let p = ProbeOptions::default();
        Self {
            tol: p.tol,
            cluster_tol: p.cluster_tol,
            value_tol: p.value_tol,
            torus_margin: NondegOptions::default().torus_margin,
            kos_tol: p.kos_tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Budgets {
    pub nondeg_starts: usize,
    pub critical_starts: usize,
    pub phases: usize,
    pub max_iter: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        let p = ProbeOptions::default();
        Self {
            nondeg_starts: NondegOptions::default().starts,
            critical_starts: p.critical_starts,
            phases: p.phases,
            max_iter: p.max_iter,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputPaths {
    pub json: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

impl OutputPaths {
    fn is_empty(&self) -> bool {
        self.json.is_none() && self.svg.is_none()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub schedule: RadiusSchedule,
    pub tolerances: Tolerances,
    pub budgets: Budgets,
    #[serde(default, skip_serializing_if = "OutputPaths::is_empty")]
    pub outputs: OutputPaths,
    /// Wall-clock timings make reports non-reproducible, so they are off unless asked for.
    #[serde(default)]
    pub timings: bool,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), Error> {
        let t = &self.tolerances;
        let tols = [t.tol, t.cluster_tol, t.value_tol, t.torus_margin, t.kos_tol];
        if tols.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::InvalidConfig("all tolerances must be positive".into()));
        }
        self.probe_options().validate()?;
        if self.budgets.nondeg_starts == 0 {
            return Err(Error::InvalidConfig("start budget must be positive".into()));
        }
        Ok(())
    }

    pub fn probe_options(&self) -> ProbeOptions {
        ProbeOptions {
            schedule: self.schedule.clone(),
            seed: self.seed,
            phases: self.budgets.phases,
            tol: self.tolerances.tol,
            cluster_tol: self.tolerances.cluster_tol,
            value_tol: self.tolerances.value_tol,
            kos_tol: self.tolerances.kos_tol,
            max_iter: self.budgets.max_iter,
            critical_starts: self.budgets.critical_starts,
            ..ProbeOptions::default()
        }
    }

    pub fn nondeg_options(&self) -> NondegOptions {
        NondegOptions {
            starts: self.budgets.nondeg_starts,
            max_iter: self.budgets.max_iter,
            seed: self.seed,
            tol: self.tolerances.tol,
            torus_margin: self.tolerances.torus_margin,
            ..NondegOptions::default()
        }
    }
}

// ---------------------------------------------------------------------------------
// Serialized records

fn big(x: &BigInt) -> String {
    x.to_string()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceRecord {
    pub dim: usize,
    pub vertices: Vec<Vec<u32>>,
    pub points: Vec<Vec<u32>>,
    /// Primitive supporting functional; empty for the improper face.
    pub functional: Vec<String>,
    pub value: String,
    pub contains_origin: bool,
    pub on_gamma_plus: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bad_witness: Option<Vec<String>>,
}

impl From<&Face> for FaceRecord {
    fn from(f: &Face) -> Self {
        let functional = if f.functional.iter().all(|c| c.sign() == num_bigint::Sign::NoSign) {
            Vec::new()
        } else {
            f.functional.iter().map(big).collect()
        };
        Self {
            dim: f.dim,
            vertices: f.vertices.clone(),
            points: f.points.clone(),
            functional,
            value: big(&f.value),
            contains_origin: f.contains_origin,
            on_gamma_plus: f.on_gamma_plus,
            bad_witness: f.bad_witness.as_ref().map(|w| w.iter().map(big).collect()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Geometry {
    pub support: Vec<Vec<u32>>,
    pub gamma0_faces: Vec<FaceRecord>,
    pub gamma_plus: Vec<FaceRecord>,
    pub bad_faces: Vec<FaceRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedHomogeneity {
    pub weights: Vec<u64>,
    pub degree: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Flags {
    pub convenient: bool,
    pub weighted_homogeneous: Option<WeightedHomogeneity>,
    pub constant_term: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    /// Vertices of the `Γ⁺` face.
    pub face: Option<Vec<Vec<u32>>>,
    pub mode: NondegMode,
    pub status: VerdictStatus,
    pub witness: Option<CriticalWitness>,
    pub budget: SearchBudget,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NondegSection {
    pub nondegenerate: bool,
    pub strongly_nondegenerate: bool,
    pub verdicts: Vec<VerdictRecord>,
}

impl From<&nondeg::NondegReport> for NondegSection {
    fn from(r: &nondeg::NondegReport) -> Self {
        Self {
            nondegenerate: r.nondegenerate,
            strongly_nondegenerate: r.strongly_nondegenerate,
            verdicts: r
                .verdicts
                .iter()
                .map(|v| VerdictRecord {
                    face: v.face.as_ref().map(|f| f.vertices.clone()),
                    mode: v.mode,
                    status: v.status,
                    witness: v.witness.clone(),
                    budget: v.budget,
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BadFaceValuesRecord {
    pub face: FaceRecord,
    pub values: Vec<ValueCluster>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRecord {
    pub includes_zero: bool,
    pub shift: Complex64,
    pub bad_face_values: Vec<BadFaceValuesRecord>,
    pub union: Vec<ValueCluster>,
}

impl BoundRecord {
    pub fn distance_to(&self, c: Complex64) -> f64 {
        self.union
            .iter()
            .map(|v| (v.center - c).norm())
            .fold(f64::INFINITY, f64::min)
    }
}

impl From<&probe::BoundSet> for BoundRecord {
    fn from(b: &probe::BoundSet) -> Self {
        Self {
            includes_zero: b.includes_zero,
            shift: b.shift,
            bad_face_values: b
                .bad_face_values
                .iter()
                .map(|v| BadFaceValuesRecord {
                    face: FaceRecord::from(&v.face),
                    values: v.values.clone(),
                })
                .collect(),
            union: b.union.clone(),
        }
    }
}

/// Conclusions that follow from the flags alone, before any probing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Predictions {
    /// Convenient and Newton non-degenerate: `S(f)` is empty.
    pub s_empty: bool,
    /// Weighted-homogeneous and strongly non-degenerate: `S(f) ∪ f(Sing f) ⊂ {0}`.
    pub values_at_zero: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub geometry_ms: f64,
    pub nondeg_ms: f64,
    pub critical_ms: f64,
    pub bound_ms: f64,
    pub probe_s_ms: f64,
    pub probe_kinf_ms: f64,
    pub checks_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl Default for ToolInfo {
    fn default() -> Self {
        Self {
            name: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputEcho {
    /// Canonical formatting of the parsed polynomial.
    pub expression: String,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema: u32,
    pub tool: ToolInfo,
    pub seed: u64,
    pub config: RunConfig,
    pub input: InputEcho,
    pub geometry: Geometry,
    pub flags: Flags,
    pub nondeg: NondegSection,
    pub critical_values: CriticalValueSet,
    pub bound: BoundRecord,
    pub s_estimate: ProbeResult,
    pub kinf_estimate: ProbeResult,
    pub predictions: Predictions,
    pub checks: Vec<CheckOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("report values are finite");
        s.push('\n');
        s
    }

    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Output of the single-section commands; present fields match the full report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionReport {
    pub schema: u32,
    pub tool: ToolInfo,
    pub seed: u64,
    pub input: InputEcho,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<Geometry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flags: Option<Flags>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bad_faces: Option<Vec<FaceRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nondeg: Option<NondegSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub critical_values: Option<CriticalValueSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<BoundRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_estimate: Option<ProbeResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kinf_estimate: Option<ProbeResult>,
}

impl SectionReport {
    fn new(f: &MixedPolynomial, seed: u64) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            tool: ToolInfo::default(),
            seed,
            input: echo(f),
            geometry: None,
            flags: None,
            bad_faces: None,
            nondeg: None,
            critical_values: None,
            bound: None,
            s_estimate: None,
            kinf_estimate: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("report values are finite");
        s.push('\n');
        s
    }
}

// ---------------------------------------------------------------------------------
// Assembly

fn echo(f: &MixedPolynomial) -> InputEcho {
    InputEcho {
        expression: parser::format(f),
        n: f.n(),
    }
}

fn require_nonconstant(f: &MixedPolynomial) -> Result<(), Error> {
    if f.is_zero() {
        Err(Error::ZeroPolynomial)
    } else if f.is_constant() {
        Err(Error::ConstantPolynomial)
    } else {
        Ok(())
    }
}

pub fn geometry(f: &MixedPolynomial) -> Result<Geometry, Error> {
    require_nonconstant(f)?;
    let gamma0 = newton::newton_polyhedron(f)?;
    let h = f.shift_constant();
    Ok(Geometry {
        support: newton::support(f)?.points.into_iter().collect(),
        gamma0_faces: gamma0.faces().iter().map(FaceRecord::from).collect(),
        gamma_plus: newton::gamma_plus_of(&gamma0).iter().map(FaceRecord::from).collect(),
        bad_faces: newton::bad_faces(&h)?.iter().map(FaceRecord::from).collect(),
    })
}

pub fn flags(f: &MixedPolynomial) -> Result<Flags, Error> {
    require_nonconstant(f)?;
    Ok(Flags {
        convenient: newton::is_convenient(f)?,
        weighted_homogeneous: f
            .is_weighted_homogeneous()?
            .map(|(weights, degree)| WeightedHomogeneity { weights, degree }),
        constant_term: f.constant_term(),
    })
}

struct Clock(Option<Instant>);

impl Clock {
    fn start(enabled: bool) -> Self {
        Self(enabled.then(Instant::now))
    }

    fn lap(&mut self) -> f64 {
        match self.0 {
            Some(t) => {
                let ms = t.elapsed().as_secs_f64() * 1e3;
                self.0 = Some(Instant::now());
                ms
            }
            None => 0.0,
        }
    }
}

fn outcome(name: &str, status: CheckStatus, detail: String) -> CheckOutcome {
    CheckOutcome {
        name: name.into(),
        status,
        detail,
    }
}

fn pass_fail(ok: bool) -> CheckStatus {
    if ok {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    }
}

/// Runs every stage on `f` and evaluates the containment checks.
pub fn assemble_report(f: &MixedPolynomial, config: &RunConfig) -> Result<AnalysisReport, Error> {
    require_nonconstant(f)?;
    config.validate()?;
    let popts = config.probe_options();
    let mut clock = Clock::start(config.timings);

    let geometry = geometry(f)?;
    let flags = flags(f)?;
    let geometry_ms = clock.lap();
    let nd = nondeg::check_newton_nondegenerate(f, &config.nondeg_options())?;
    let nondeg = NondegSection::from(&nd);
    let nondeg_ms = clock.lap();
    let critical_values = probe::critical_values(f, &popts)?;
    let critical_ms = clock.lap();
    let bound = BoundRecord::from(&probe::bad_face_critical_values(f, &popts)?);
    let bound_ms = clock.lap();
    let s_estimate = probe::estimate_s(f, &popts)?;
    let probe_s_ms = clock.lap();
    let kinf_estimate = probe::estimate_kinf(f, &popts)?;
    let probe_kinf_ms = clock.lap();

    let predictions = Predictions {
        s_empty: flags.convenient && nondeg.nondegenerate,
        values_at_zero: flags.weighted_homogeneous.is_some() && nondeg.strongly_nondegenerate,
    };
    let ctx = CheckContext {
        f,
        popts: &popts,
        nondeg: &nondeg,
        critical_values: &critical_values,
        bound: &bound,
        s: &s_estimate,
        kinf: &kinf_estimate,
        predictions: &predictions,
    };
    let checks = ctx.run()?;
    let checks_ms = clock.lap();

    let mut echoed = config.clone();
    echoed.outputs = OutputPaths::default();
    Ok(AnalysisReport {
        schema: SCHEMA_VERSION,
        tool: ToolInfo::default(),
        seed: config.seed,
        config: echoed,
        input: echo(f),
        geometry,
        flags,
        nondeg,
        critical_values,
        bound,
        s_estimate,
        kinf_estimate,
        predictions,
        checks,
        timings: config.timings.then_some(Timings {
            geometry_ms,
            nondeg_ms,
            critical_ms,
            bound_ms,
            probe_s_ms,
            probe_kinf_ms,
            checks_ms,
        }),
    })
}

struct CheckContext<'a> {
    f: &'a MixedPolynomial,
    popts: &'a ProbeOptions,
    nondeg: &'a NondegSection,
    critical_values: &'a CriticalValueSet,
    bound: &'a BoundRecord,
    s: &'a ProbeResult,
    kinf: &'a ProbeResult,
    predictions: &'a Predictions,
}

impl CheckContext<'_> {
    fn run(&self) -> Result<Vec<CheckOutcome>, Error> {
        Ok(vec![
            self.bound_containment(),
            self.s_in_kinf(),
            self.boundedness()?,
            self.sigma_infinity(),
            self.prediction_s_empty(),
            self.prediction_values_at_zero(),
        ])
    }

    fn value_tol(&self) -> f64 {
        self.popts.value_tol
    }

    fn bound_containment(&self) -> CheckOutcome {
        let name = "bound_containment";
        if !self.nondeg.nondegenerate {
            return outcome(
                name,
                CheckStatus::NotApplicable,
                "f is not Newton non-degenerate".into(),
            );
        }
        let tol = self.value_tol();
        let s: Vec<&ValueCluster> = self.s.finite_limits().collect();
        let outside = s.iter().filter(|c| self.bound.distance_to(c.center) > tol).count();
        let unmatched = self
            .bound
            .union
            .iter()
            .filter(|b| s.iter().all(|c| (c.center - b.center).norm() > tol))
            .count();
        outcome(
            name,
            pass_fail(outside == 0),
            format!(
                "{} of {} S clusters outside the bound; {} of {} bound values not reached by S",
                outside,
                s.len(),
                unmatched,
                self.bound.union.len()
            ),
        )
    }

    fn s_in_kinf(&self) -> CheckOutcome {
        let tol = self.value_tol();
        let k: Vec<&ValueCluster> = self
            .kinf
            .clusters
            .iter()
            .filter(|c| c.classification != Classification::Divergent)
            .collect();
        let mut unmatched = 0;
        let mut bad_kos = 0;
        let mut total = 0;
        for c in self.s.finite_limits() {
            total += 1;
            if k.iter().all(|x| (x.center - c.center).norm() > tol) {
                unmatched += 1;
            }
            if !kos_tends_to_zero(c, self.popts.kos_tol) {
                bad_kos += 1;
            }
        }
        outcome(
            "s_subset_kinf",
            pass_fail(unmatched == 0 && bad_kos == 0),
            format!("{total} S clusters: {unmatched} without a K∞ match, {bad_kos} with kos not tending to 0"),
        )
    }

    fn boundedness(&self) -> Result<CheckOutcome, Error> {
        let name = "boundedness";
        if !self.nondeg.strongly_nondegenerate {
            return Ok(outcome(
                name,
                CheckStatus::NotApplicable,
                "f is not strongly non-degenerate".into(),
            ));
        }
        let s_max = self.s.finite_limits().map(|c| c.center.norm()).fold(0.0, f64::max);
        let wide = ProbeOptions {
            box_lo: self.popts.box_lo / 10.0,
            box_hi: self.popts.box_hi * 10.0,
            ..self.popts.clone()
        };
        let wider = probe::critical_values(self.f, &wide)?;
        let m0 = self.critical_values.max_modulus;
        let m1 = wider.max_modulus;
        let ok = m0.is_finite() && s_max.is_finite() && (m1 - m0).abs() <= self.value_tol();
        Ok(outcome(
            name,
            pass_fail(ok),
            format!("max |critical value| {m0:.6e} (box ×10: {m1:.6e}); max |S value| {s_max:.6e}"),
        ))
    }

    fn sigma_infinity(&self) -> CheckOutcome {
        let name = "sigma_infinity";
        if !self.nondeg.nondegenerate {
            return outcome(
                name,
                CheckStatus::NotApplicable,
                "f is not Newton non-degenerate".into(),
            );
        }
        let tol = self.value_tol();
        let radii = self.popts.schedule.radii.len();
        let bad_values: Vec<Complex64> = self
            .bound
            .bad_face_values
            .iter()
            .flat_map(|b| b.values.iter().map(|v| v.center))
            .collect();
        let constant: Vec<&ValueCluster> = self
            .s
            .clusters
            .iter()
            .filter(|c| {
                c.members.len() == radii
                    && c.drift.iter().all(|&d| d <= CONSTANT_DRIFT)
                    && (c.center - self.bound.shift).norm() > tol
            })
            .collect();
        let stray = constant
            .iter()
            .filter(|c| bad_values.iter().all(|v| (v - c.center).norm() > tol))
            .count();
        outcome(
            name,
            pass_fail(stray == 0),
            format!(
                "{} constant non-zero chains, {} away from bad-face values",
                constant.len(),
                stray
            ),
        )
    }

    fn prediction_s_empty(&self) -> CheckOutcome {
        let name = "prediction_s_empty";
        if !self.predictions.s_empty {
            return outcome(
                name,
                CheckStatus::NotApplicable,
                "f is not convenient and non-degenerate".into(),
            );
        }
        let k = self.s.finite_limits().count();
        outcome(name, pass_fail(k == 0), format!("{k} finite_limit S clusters"))
    }

    fn prediction_values_at_zero(&self) -> CheckOutcome {
        let name = "prediction_values_at_zero";
        if !self.predictions.values_at_zero {
            return outcome(
                name,
                CheckStatus::NotApplicable,
                "f is not weighted-homogeneous and strongly non-degenerate".into(),
            );
        }
        let tol = self.value_tol();
        let stray = self
            .critical_values
            .clusters
            .iter()
            .chain(self.s.finite_limits())
            .filter(|c| c.center.norm() > tol)
            .count();
        outcome(name, pass_fail(stray == 0), format!("{stray} values away from 0"))
    }
}

/// Final `kos` entry at most `kos_tol` (or at its noise floor) with a non-increasing tail.
pub fn kos_tends_to_zero(c: &ValueCluster, kos_tol: f64) -> bool {
    c.members
        .last()
        .is_some_and(|m| m.kos <= kos_tol || m.kos <= m.kos_floor)
        && c.kos_tail_non_increasing()
}

// ---------------------------------------------------------------------------------
// Commands

#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Degenerate(Error),
    #[error("cannot write {path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl From<Error> for CommandError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(p) => Self::Parse(p),
            Error::InvalidConfig(m) => Self::Config(m),
            other => Self::Degenerate(other),
        }
    }
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Parse(_) | Self::Config(_) => 2,
            Self::Degenerate(_) => 3,
            Self::Io { .. } => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Parse(_) => "parse_error",
            Self::Config(_) => "config_error",
            Self::Degenerate(_) => "degenerate_input",
            Self::Io { .. } => "io_error",
        }
    }

    /// Single-line JSON diagnostic.
    pub fn to_json_line(&self) -> String {
        let mut v = serde_json::json!({
            "error": self.kind(),
            "message": self.to_string(),
        });
        if let Self::Parse(p) = self {
            v["offset"] = p.offset.into();
            v["expected"] = p.expected.clone().into();
        }
        v.to_string()
    }
}

fn parse_input(src: &SourceExpr<'_>, config: &RunConfig) -> Result<MixedPolynomial, CommandError> {
    let f = parser::parse(src)?;
    config.validate()?;
    require_nonconstant(&f)?;
    Ok(f)
}

fn write_file(path: &Path, text: &str) -> Result<(), CommandError> {
    std::fs::write(path, text).map_err(|e| CommandError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn write_outputs(json: &str, plot: PlotSets, config: &RunConfig) -> Result<(), CommandError> {
    if let Some(p) = &config.outputs.json {
        write_file(p, json)?;
    }
    if let Some(p) = &config.outputs.svg {
        write_file(p, &render_svg(&plot))?;
    }
    Ok(())
}

/// Full analysis; writes the JSON and SVG files named in `config.outputs`.
pub fn cmd_analyze(src: &SourceExpr<'_>, config: &RunConfig) -> Result<AnalysisReport, CommandError> {
    let f = parse_input(src, config)?;
    let report = assemble_report(&f, config)?;
    write_outputs(&report.to_json(), PlotSets::from(&report), config)?;
    Ok(report)
}

/// The sections a single-purpose command produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Section {
    Faces,
    BadFaces,
    Nondeg,
    Bound,
    ProbeS,
    ProbeKinf,
}

pub fn cmd_section(src: &SourceExpr<'_>, section: Section, config: &RunConfig) -> Result<SectionReport, CommandError> {
    let f = parse_input(src, config)?;
    let popts = config.probe_options();
    let mut out = SectionReport::new(&f, config.seed);
    match section {
        Section::Faces => {
            out.geometry = Some(geometry(&f)?);
            out.flags = Some(flags(&f)?);
        }
        Section::BadFaces => out.bad_faces = Some(geometry(&f)?.bad_faces),
        Section::Nondeg => {
            let r = nondeg::check_newton_nondegenerate(&f, &config.nondeg_options())?;
            out.nondeg = Some(NondegSection::from(&r));
        }
        Section::Bound => {
            out.critical_values = Some(probe::critical_values(&f, &popts)?);
            out.bound = Some(BoundRecord::from(&probe::bad_face_critical_values(&f, &popts)?));
        }
        Section::ProbeS => out.s_estimate = Some(probe::estimate_s(&f, &popts)?),
        Section::ProbeKinf => out.kinf_estimate = Some(probe::estimate_kinf(&f, &popts)?),
    }
    write_outputs(&out.to_json(), PlotSets::from(&out), config)?;
    Ok(out)
}

pub fn cmd_faces(src: &SourceExpr<'_>, config: &RunConfig) -> Result<SectionReport, CommandError> {
    cmd_section(src, Section::Faces, config)
}

pub fn cmd_badfaces(src: &SourceExpr<'_>, config: &RunConfig) -> Result<SectionReport, CommandError> {
    cmd_section(src, Section::BadFaces, config)
}

pub fn cmd_nondeg(src: &SourceExpr<'_>, config: &RunConfig) -> Result<SectionReport, CommandError> {
    cmd_section(src, Section::Nondeg, config)
}

pub fn cmd_bound(src: &SourceExpr<'_>, config: &RunConfig) -> Result<SectionReport, CommandError> {
    cmd_section(src, Section::Bound, config)
}

pub fn cmd_probe_s(src: &SourceExpr<'_>, config: &RunConfig) -> Result<SectionReport, CommandError> {
    cmd_section(src, Section::ProbeS, config)
}

pub fn cmd_probe_kinf(src: &SourceExpr<'_>, config: &RunConfig) -> Result<SectionReport, CommandError> {
    cmd_section(src, Section::ProbeKinf, config)
}

// ---------------------------------------------------------------------------------
// SVG

/// Value sets drawn in the complex plane.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PlotSets {
    pub critical: Vec<Complex64>,
    pub bound: Vec<Complex64>,
    pub s: Vec<Complex64>,
    pub kinf: Vec<Complex64>,
}

fn kinf_points(r: &ProbeResult) -> Vec<Complex64> {
    r.clusters
        .iter()
        .filter(|c| c.classification != Classification::Divergent)
        .map(|c| c.center)
        .collect()
}

fn s_points(r: &ProbeResult) -> Vec<Complex64> {
    r.finite_limits().map(|c| c.center).collect()
}

impl From<&AnalysisReport> for PlotSets {
    fn from(r: &AnalysisReport) -> Self {
        Self {
            critical: r.critical_values.values(),
            bound: r.bound.union.iter().map(|c| c.center).collect(),
            s: s_points(&r.s_estimate),
            kinf: kinf_points(&r.kinf_estimate),
        }
    }
}

impl From<&SectionReport> for PlotSets {
    fn from(r: &SectionReport) -> Self {
        Self {
            critical: r.critical_values.as_ref().map(|c| c.values()).unwrap_or_default(),
            bound: r
                .bound
                .as_ref()
                .map(|b| b.union.iter().map(|c| c.center).collect())
                .unwrap_or_default(),
            s: r.s_estimate.as_ref().map(s_points).unwrap_or_default(),
            kinf: r.kinf_estimate.as_ref().map(kinf_points).unwrap_or_default(),
        }
    }
}

const SIZE: f64 = 600.0;
const MARGIN: f64 = 50.0;

/// Smallest `m·10^k` (`m ∈ {1, 2, 5}`) at or above `x`.
fn nice_ceiling(x: f64) -> f64 {
    let p = 10f64.powf(x.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * p)
        .find(|v| *v >= x)
        .unwrap_or(10.0 * p)
}

pub fn render_svg(sets: &PlotSets) -> String {
    let extent = sets
        .critical
        .iter()
        .chain(&sets.bound)
        .chain(&sets.s)
        .chain(&sets.kinf)
        .filter(|c| c.is_finite())
        .map(|c| c.re.abs().max(c.im.abs()))
        .fold(0.0, f64::max);
    let extent = nice_ceiling((extent * 1.05).max(1e-3));
    let plot = SIZE - 2.0 * MARGIN;
    let px = |c: Complex64| {
        (
            MARGIN + (c.re + extent) / (2.0 * extent) * plot,
            MARGIN + (extent - c.im) / (2.0 * extent) * plot,
        )
    };
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);
    let (x0, y0) = px(Complex64::new(0.0, 0.0));
    let (lo, hi) = (MARGIN, SIZE - MARGIN);
    let _ = writeln!(
        s,
        r##"<g stroke="#bbb" stroke-width="1"><rect x="{lo}" y="{lo}" width="{plot}" height="{plot}" fill="none"/><line x1="{lo}" y1="{y0:.2}" x2="{hi}" y2="{y0:.2}"/><line x1="{x0:.2}" y1="{lo}" x2="{x0:.2}" y2="{hi}"/></g>"##
    );
    let _ = writeln!(
        s,
        r##"<g fill="#555"><text x="{lo}" y="{:.2}">-{extent}</text><text x="{hi}" y="{:.2}" text-anchor="end">{extent}</text><text x="{:.2}" y="{:.2}">{extent}i</text><text x="{hi}" y="{:.2}" text-anchor="end">Re</text><text x="{:.2}" y="{:.2}">Im</text></g>"##,
        hi + 14.0,
        hi + 14.0,
        x0 + 4.0,
        lo + 12.0,
        y0 - 4.0,
        x0 + 4.0,
        lo - 6.0,
    );

    let _ = writeln!(s, r##"<g class="critical" fill="#999">"##);
    for c in sets.critical.iter().filter(|c| c.is_finite()) {
        let (x, y) = px(*c);
        let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2"/>"#);
    }
    s.push_str("</g>\n");
    let _ = writeln!(
        s,
        r##"<g class="bound" fill="none" stroke="#1f5fbf" stroke-width="1">"##
    );
    for c in sets.bound.iter().filter(|c| c.is_finite()) {
        let (x, y) = px(*c);
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="7" height="7"/>"#,
            x - 3.5,
            y - 3.5
        );
    }
    s.push_str("</g>\n");
    let _ = writeln!(s, r##"<g class="s" fill="#d62728">"##);
    for c in sets.s.iter().filter(|c| c.is_finite()) {
        let (x, y) = px(*c);
        let _ = writeln!(s, r#"<circle class="s-marker" cx="{x:.2}" cy="{y:.2}" r="2.5"/>"#);
    }
    s.push_str("</g>\n");
    let _ = writeln!(s, r##"<g class="kinf" stroke="#2ca02c" stroke-width="1.2">"##);
    for c in sets.kinf.iter().filter(|c| c.is_finite()) {
        let (x, y) = px(*c);
        let _ = writeln!(
            s,
            r#"<path d="M{:.2} {:.2}L{:.2} {:.2}M{:.2} {:.2}L{:.2} {:.2}"/>"#,
            x - 4.0,
            y - 4.0,
            x + 4.0,
            y + 4.0,
            x - 4.0,
            y + 4.0,
            x + 4.0,
            y - 4.0
        );
    }
    s.push_str("</g>\n");

    let legend = [
        (
            r##"<circle cx="12" cy="0" r="3" fill="#999"/>"##,
            "critical values",
            sets.critical.len(),
        ),
        (
            r##"<rect x="8.5" y="-3.5" width="7" height="7" fill="none" stroke="#1f5fbf"/>"##,
            "bound set",
            sets.bound.len(),
        ),
        (
            r##"<circle cx="12" cy="0" r="3" fill="#d62728"/>"##,
            "S finite limits",
            sets.s.len(),
        ),
        (
            r##"<path d="M8 -4L16 4M8 4L16 -4" stroke="#2ca02c" stroke-width="1.2"/>"##,
            "K∞ candidates",
            sets.kinf.len(),
        ),
    ];
    let _ = writeln!(
        s,
        r##"<g class="legend" transform="translate({} {})"><rect x="0" y="-12" width="170" height="{}" fill="white" stroke="#bbb"/>"##,
        MARGIN + 6.0,
        MARGIN + 18.0,
        16 * legend.len() + 8
    );
    for (k, (marker, label, count)) in legend.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<g transform="translate(0 {})">{marker}<text x="24" y="4">{label} ({count})</text></g>"#,
            16 * k
        );
    }
    s.push_str("</g>\n</svg>\n");
    s
}

pub fn emit_svg(sets: &PlotSets, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, render_svg(sets))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_str;

    pub(crate) fn quick_config() -> RunConfig {
        RunConfig {
            schedule: RadiusSchedule {
                radii: vec![1e1, 1e2, 1e3],
                starts: 64,
            },
            budgets: Budgets {
                nondeg_starts: 128,
                critical_starts: 64,
                phases: 32,
                max_iter: 200,
            },
            ..RunConfig::default()
        }
    }

    #[test]
    fn mixed_product_report_shape() {
        let f = parse_str("z1*z2 + zb1^2*zb2^2").unwrap();
        let r = assemble_report(&f, &quick_config()).unwrap();
        assert_eq!(r.schema, 1);
        assert_eq!(r.geometry.bad_faces.len(), 1);
        assert_eq!(r.geometry.bad_faces[0].vertices, vec![vec![1, 1], vec![2, 2]]);
        assert_eq!(r.geometry.bad_faces[0].bad_witness, Some(vec!["1".into(), "-1".into()]));
        assert!(r.nondeg.strongly_nondegenerate);
        assert!(!r.flags.convenient);
        assert!(r.timings.is_none());
        for c in &r.checks {
            assert_ne!(c.status, CheckStatus::Fail, "{c:?}");
        }
        assert_eq!(r.check("bound_containment").unwrap().status, CheckStatus::Pass);
    }

    #[test]
    fn convenient_sum_prediction_holds() {
        let f = parse_str("z1 + z2 + zb1^2 + zb2^2").unwrap();
        let r = assemble_report(&f, &quick_config()).unwrap();
        assert!(r.flags.convenient);
        assert!(r.predictions.s_empty);
        assert_eq!(r.check("prediction_s_empty").unwrap().status, CheckStatus::Pass);
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let f = parse_str("z1*z2 + zb1^2*zb2^2").unwrap();
        let r = assemble_report(&f, &quick_config()).unwrap();
        let a = r.to_json();
        let back: AnalysisReport = serde_json::from_str(&a).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json(), a);
    }

    #[test]
    fn json_encodings() {
        let f = parse_str("z1*z2 + zb1^2*zb2^2").unwrap();
        let out = cmd_badfaces(&SourceExpr::new("z1*z2 + zb1^2*zb2^2"), &quick_config()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out.to_json()).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["bad_faces"][0]["bad_witness"], serde_json::json!(["1", "-1"]));
        let flags = serde_json::to_value(flags(&f).unwrap()).unwrap();
        assert_eq!(flags["constant_term"], serde_json::json!([0.0, 0.0]));
    }

    #[test]
    fn constant_is_degenerate() {
        let e = cmd_analyze(&SourceExpr::new("3 + 2i"), &quick_config()).unwrap_err();
        assert_eq!(e.exit_code(), 3);
        let e = cmd_faces(&SourceExpr::new("z1 - z1"), &quick_config()).unwrap_err();
        assert_eq!(e.exit_code(), 3);
    }

    #[test]
    fn parse_errors_exit_2() {
        let e = cmd_analyze(&SourceExpr::new("("), &quick_config()).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let line = e.to_json_line();
        assert!(!line.contains('\n'));
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["error"], "parse_error");
        assert!(v["offset"].is_u64());
    }

    #[test]
    fn bad_config_rejected() {
        let mut c = quick_config();
        c.schedule.radii = vec![10.0, 5.0];
        assert_eq!(cmd_faces(&SourceExpr::new("z1"), &c).unwrap_err().exit_code(), 2);
        let mut c = quick_config();
        c.tolerances.value_tol = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn svg_is_deterministic_with_legend() {
        let sets = PlotSets {
            critical: vec![Complex64::new(0.5, 0.25)],
            bound: vec![Complex64::new(0.0, 0.0)],
            s: vec![Complex64::new(-0.25, 0.5), Complex64::new(0.75, 0.0)],
            kinf: vec![Complex64::new(0.75, 0.0)],
        };
        let a = render_svg(&sets);
        assert_eq!(a, render_svg(&sets));
        assert_eq!(a.matches("s-marker").count(), 2);
        assert!(a.contains("S finite limits (2)"));
        let empty = render_svg(&PlotSets::default());
        assert!(empty.contains("legend"));
        assert_eq!(empty.matches("s-marker").count(), 0);
    }

    #[test]
    fn nice_ceiling_steps() {
        assert_eq!(nice_ceiling(0.8), 1.0);
        assert_eq!(nice_ceiling(1.3), 2.0);
        assert_eq!(nice_ceiling(3.0), 5.0);
        assert_eq!(nice_ceiling(7.0), 10.0);
    }
}
