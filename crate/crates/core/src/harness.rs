//! Experiment orchestration: configuration, dispatch to the module
//! pipelines, report assembly and output files.
//!
//! A run always yields a [`RunReport`]. Its status maps to the process exit
//! code: 0 when every embedded check passes, 1 when a check fails or a
//! solver gives up, 2 for an invalid configuration or unusable output
//! directory, 3 when a resource budget is exceeded.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::coarse::{
    audit, find_efficient_copy, fold_map, k2n_certificate, Certificate, CertificateStatus,
    CoarseError,
};
use crate::cuts::{convert_metric, distortion, CutError, CutMeasure, Metric};
use crate::embed::{
    compare_monte_carlo, distortion_bound, embedding_distortion, monte_carlo,
    sample_recursive_cut, separation_table, EmbedError, RecursiveFamily, MAX_MIDDLES,
};
use crate::graph::{
    all_pairs_distances, make_k2n, power_with_budget, st_geodesics, verify_copy, DistanceMatrix,
    GraphError, StGraph, DEFAULT_GEODESIC_CAP,
};
use crate::io::{emit_graph, emit_instance, emit_measure, emit_sample_csv, parse_instance, parse_measure, IoError};
use crate::lp::{c1_lp, gap_report, random_instance, GapReport, LpError, C1_MAX_VERTICES};
use crate::scalar::{format_q, parse_q, q_frac, q_int, q_pow, Extended, Scalar, ScalarMode, Q};
use crate::seed::sample_seed;

/// Environment variables overriding CLI flags carry this prefix, e.g.
/// `CUTGAP_SEED`.
pub const ENV_PREFIX: &str = "CUTGAP_";
pub const DEFAULT_SAMPLES: u64 = 10_000;
pub const DEFAULT_VERTEX_BUDGET: u64 = 1_000_000;
/// The flowcut run attaches a `c1` reference only up to this many vertices.
pub const C1_REFERENCE_MAX_VERTICES: usize = 12;
pub const REPORT_FILE: &str = "report.json";

const MAX_CAPACITY: i64 = 4;
const MAX_DEMAND: i64 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Build,
    Embed,
    C1,
    Flowcut,
    Audit,
    Certify,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Build,
        ExperimentKind::Embed,
        ExperimentKind::C1,
        ExperimentKind::Flowcut,
        ExperimentKind::Audit,
        ExperimentKind::Certify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Build => "build",
            ExperimentKind::Embed => "embed",
            ExperimentKind::C1 => "c1",
            ExperimentKind::Flowcut => "flowcut",
            ExperimentKind::Audit => "audit",
            ExperimentKind::Certify => "certify",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown experiment `{s}`"))
    }
}

/// Map examined by the audit experiment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AuditMap {
    /// The recursive random-cut embedding.
    #[default]
    Embedding,
    /// Distance to the nearer terminal; collapses mirror images.
    Fold,
    /// The optimal measure from the `c1` linear program.
    C1,
}

impl FromStr for AuditMap {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "embedding" => Ok(AuditMap::Embedding),
            "fold" => Ok(AuditMap::Fold),
            "c1" => Ok(AuditMap::C1),
            other => Err(format!("unknown audit map `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Middle count of the base graph `K_{2,n}`.
    pub n: usize,
    /// Composition depth of `K_{2,n}^k`.
    pub k: usize,
    /// Rational (`p/q`, integer or decimal) overrides.
    pub eps: Option<String>,
    pub delta: Option<String>,
    pub granularity: Option<usize>,
    /// Required by randomized steps: Monte Carlo, random instances and
    /// sampled geodesic families.
    pub seed: Option<u64>,
    pub mode: ScalarMode,
    pub out: Option<PathBuf>,
    pub budget_vertices: u64,
    pub samples: u64,
    /// Per-pair bound on the Monte Carlo z-score.
    pub z_limit: f64,
    pub commodities: usize,
    /// Flow instance (flowcut) or cut measure on `K_{2,n}` (certify).
    pub input: Option<PathBuf>,
    pub map: AuditMap,
    /// Worker pool size; the global pool when unset.
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            n: 2,
            k: 1,
            eps: None,
            delta: None,
            granularity: None,
            seed: None,
            mode: ScalarMode::Rational,
            out: None,
            budget_vertices: DEFAULT_VERTEX_BUDGET,
            samples: DEFAULT_SAMPLES,
            z_limit: 3.0,
            commodities: 4,
            input: None,
            map: AuditMap::Embedding,
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::InvalidConfig(msg));
        if self.n == 0 || self.n > MAX_MIDDLES {
            return bad(format!("n must lie in 1..={MAX_MIDDLES}, got {}", self.n));
        }
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if self.budget_vertices < 2 {
            return bad("budget must allow at least two vertices".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be positive".into());
        }
        if matches!(self.granularity, Some(m) if m < 2) {
            return bad("granularity must be at least 2".into());
        }
        if self.z_limit.is_nan() || self.z_limit <= 0.0 {
            return bad("z-limit must be positive".into());
        }
        if let Some(eps) = self.eps_q()? {
            if eps < q_int(0) {
                return bad("eps must be nonnegative".into());
            }
            if self.kind == ExperimentKind::Certify && eps >= q_frac(1, 2) {
                return bad("certify needs eps < 1/2".into());
            }
        }
        if let Some(delta) = self.delta_q()? {
            if delta <= q_int(0) || delta > q_int(1) {
                return bad("delta must lie in (0, 1]".into());
            }
        }
        match self.kind {
            ExperimentKind::Embed if self.seed.is_some() && self.samples == 0 => {
                bad("Monte Carlo needs a positive sample count".into())
            }
            ExperimentKind::Flowcut if self.input.is_none() && self.seed.is_none() => {
                bad("random flow instances need --seed".into())
            }
            ExperimentKind::Flowcut if self.input.is_none() && self.commodities == 0 => {
                bad("random flow instances need at least one commodity".into())
            }
            _ => Ok(()),
        }
    }

    fn eps_q(&self) -> Result<Option<Q>, HarnessError> {
        self.eps.as_deref().map(|t| parse_param("eps", t)).transpose()
    }

    fn delta_q(&self) -> Result<Option<Q>, HarnessError> {
        self.delta.as_deref().map(|t| parse_param("delta", t)).transpose()
    }
}

/// Accepts `p/q`, integers and finite decimals, all read exactly.
fn parse_param(name: &str, text: &str) -> Result<Q, HarnessError> {
    let bad = || HarnessError::InvalidConfig(format!("{name}: cannot read `{text}` as a rational"));
    let t = text.trim();
    match t.split_once('.') {
        None => parse_q(t).map_err(|_| bad()),
        Some((int, frac)) => {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || int.contains('/') {
                return Err(bad());
            }
            let negative = int.starts_with('-');
            let whole = match int.trim_start_matches(['-', '+']) {
                "" => q_int(0),
                digits => parse_q(digits).map_err(|_| bad())?,
            };
            let digits = parse_q(frac).map_err(|_| bad())?;
            let value = whole + digits / q_pow(&q_int(10), frac.len() as u32);
            Ok(if negative { -value } else { value })
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("resource budget exceeded: {0}")]
    Budget(String),
    #[error("{0}")]
    Failed(String),
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl HarnessError {
    pub fn status(&self) -> RunStatus {
        match self {
            HarnessError::InvalidConfig(_) | HarnessError::Output { .. } => RunStatus::InvalidConfig,
            HarnessError::Budget(_) => RunStatus::Budget,
            HarnessError::Failed(_) => RunStatus::Error,
        }
    }
}

impl From<GraphError> for HarnessError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::Budget { .. } => HarnessError::Budget(e.to_string()),
            GraphError::EmptyMiddle => HarnessError::InvalidConfig(e.to_string()),
            e => HarnessError::Failed(e.to_string()),
        }
    }
}

impl From<EmbedError> for HarnessError {
    fn from(e: EmbedError) -> Self {
        match e {
            EmbedError::Graph(g) => g.into(),
            EmbedError::Budget { .. } => HarnessError::Budget(e.to_string()),
            EmbedError::BadMiddleCount(_) | EmbedError::BadDepth => HarnessError::InvalidConfig(e.to_string()),
            e => HarnessError::Failed(e.to_string()),
        }
    }
}

impl From<LpError> for HarnessError {
    fn from(e: LpError) -> Self {
        match e {
            LpError::Budget { .. } => HarnessError::Budget(e.to_string()),
            e => HarnessError::Failed(e.to_string()),
        }
    }
}

impl From<CoarseError> for HarnessError {
    fn from(e: CoarseError) -> Self {
        match e {
            CoarseError::Graph(g) => g.into(),
            CoarseError::BadGranularity(_) | CoarseError::BadParameter(_) => {
                HarnessError::InvalidConfig(e.to_string())
            }
            e => HarnessError::Failed(e.to_string()),
        }
    }
}

impl From<CutError> for HarnessError {
    fn from(e: CutError) -> Self {
        HarnessError::Failed(e.to_string())
    }
}

/// Unreadable input files are configuration errors.
impl From<IoError> for HarnessError {
    fn from(e: IoError) -> Self {
        HarnessError::InvalidConfig(e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Pass,
    /// An embedded check failed.
    Fail,
    /// A solver or module gave up.
    Error,
    InvalidConfig,
    Budget,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Pass => 0,
            RunStatus::Fail | RunStatus::Error => 1,
            RunStatus::InvalidConfig => 2,
            RunStatus::Budget => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_clock_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub status: RunStatus,
    pub error: Option<String>,
    pub results: Value,
    pub checks: Vec<Check>,
    pub certificates: Vec<Certificate>,
    /// Files written next to the report, in write order.
    pub files: Vec<String>,
    pub parallel: bool,
    pub timing: Timing,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    pub fn passed(&self) -> bool {
        self.status == RunStatus::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// Everything except timing; identical configs give identical text.
    pub fn result_section(&self) -> String {
        let mut value = serde_json::to_value(self).expect("report serialises");
        if let Value::Object(map) = &mut value {
            map.remove("timing");
        }
        serde_json::to_string_pretty(&value).expect("report serialises")
    }
}

#[derive(Default)]
struct Outcome {
    results: Map<String, Value>,
    checks: Vec<Check>,
    certificates: Vec<Certificate>,
    artifacts: Vec<(String, String)>,
}

impl Outcome {
    fn result(&mut self, key: &str, value: Value) {
        self.results.insert(key.to_string(), value);
    }

    fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        });
    }

    fn artifact(&mut self, name: &str, contents: String) {
        self.artifacts.push((name.to_string(), contents));
    }
}

/// Runs one experiment and writes its files when `config.out` is set. The
/// report is written last so a partial directory never claims success.
pub fn run(config: &ExperimentConfig) -> RunReport {
    let start = Instant::now();
    let mut outcome = Outcome::default();
    let result = config
        .validate()
        .and_then(|_| with_pool(config.threads, || dispatch(config, &mut outcome)));
    let (status, error) = match result {
        Ok(()) if outcome.checks.iter().all(|c| c.passed) => (RunStatus::Pass, None),
        Ok(()) => (RunStatus::Fail, None),
        Err(e) => (e.status(), Some(e.to_string())),
    };
    let files = match &config.out {
        Some(_) => outcome
            .artifacts
            .iter()
            .map(|(name, _)| name.clone())
            .chain([REPORT_FILE.to_string()])
            .collect(),
        None => Vec::new(),
    };
    let mut report = RunReport {
        tool: "cutgap".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: config.clone(),
        status,
        error,
        results: Value::Object(outcome.results),
        checks: outcome.checks,
        certificates: outcome.certificates,
        files,
        parallel: crate::exec::is_parallel(),
        timing: Timing { wall_clock_ms: 0.0 },
    };
    report.timing.wall_clock_ms = start.elapsed().as_secs_f64() * 1e3;
    if let Some(dir) = &config.out {
        if let Err(e) = write_outputs(dir, &report, &outcome.artifacts) {
            report.status = e.status();
            report.error = Some(e.to_string());
        }
    }
    report
}

fn write_outputs(dir: &Path, report: &RunReport, artifacts: &[(String, String)]) -> Result<(), HarnessError> {
    let write = |path: PathBuf, contents: &str| {
        std::fs::write(&path, contents).map_err(|source| HarnessError::Output { path, source })
    };
    std::fs::create_dir_all(dir).map_err(|source| HarnessError::Output {
        path: dir.to_path_buf(),
        source,
    })?;
    for (name, contents) in artifacts {
        write(dir.join(name), contents)?;
    }
    write(dir.join(REPORT_FILE), &report.to_json())
}

#[cfg(feature = "parallel")]
fn with_pool<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_pool<R: Send>(_threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    f()
}

fn dispatch(config: &ExperimentConfig, out: &mut Outcome) -> Result<(), HarnessError> {
    match (config.kind, config.mode) {
        (ExperimentKind::Build, _) => build(config, out),
        (ExperimentKind::Embed, _) => embed(config, out),
        (ExperimentKind::C1, _) => c1(config, out),
        (ExperimentKind::Flowcut, _) => flowcut(config, out),
        (ExperimentKind::Audit, ScalarMode::Rational) => audit_run::<Q>(config, out),
        (ExperimentKind::Audit, ScalarMode::Double) => audit_run::<f64>(config, out),
        (ExperimentKind::Certify, ScalarMode::Rational) => certify::<Q>(config, out),
        (ExperimentKind::Certify, ScalarMode::Double) => certify::<f64>(config, out),
    }
}

fn host(config: &ExperimentConfig) -> Result<StGraph, HarnessError> {
    Ok(power_with_budget(&make_k2n(config.n)?, config.k, config.budget_vertices as u128)?)
}

fn family(config: &ExperimentConfig) -> Result<RecursiveFamily, HarnessError> {
    Ok(RecursiveFamily::with_budget(config.n, config.k, config.budget_vertices as u128)?)
}

fn build(config: &ExperimentConfig, out: &mut Outcome) -> Result<(), HarnessError> {
    let g = host(config)?;
    let (n, k) = (config.n as u128, config.k as u32);
    let want_edges = (2 * n).pow(k);
    let want_vertices = 2 + n * (0..k).map(|j| (2 * n).pow(j)).sum::<u128>();
    let want_geodesics = BigUint::from(n).pow((1u32 << k) - 1);
    let d = all_pairs_distances(&g);
    let st = d.get(g.s(), g.t()).clone();
    let geodesics = st_geodesics(&g, 1, 0).total;

    out.result("vertices", json!(g.vertex_count()));
    out.result("edges", json!(g.edge_count()));
    out.result("st_distance", json!(format_q(&st)));
    out.result("geodesics", json!(geodesics.to_string()));
    let levels: Vec<usize> = g
        .power_info()
        .map(|info| info.copy_endpoints.iter().map(Vec::len).collect())
        .unwrap_or_default();
    out.result("copies_per_level", json!(levels));

    out.check(
        "edge-count",
        g.edge_count() as u128 == want_edges,
        format!("{} edges, expected (2n)^k = {want_edges}", g.edge_count()),
    );
    out.check(
        "vertex-count",
        g.vertex_count() as u128 == want_vertices,
        format!("{} vertices, expected {want_vertices}", g.vertex_count()),
    );
    out.check(
        "geodesic-count",
        geodesics == want_geodesics,
        format!("{geodesics} s-t geodesics, expected n^(2^k - 1) = {want_geodesics}"),
    );
    out.check(
        "st-distance",
        g.is_unit_length() && st == q_pow(&q_int(2), k),
        format!("unit edges and d(s,t) = {}", format_q(&st)),
    );
    out.check(
        "metric",
        d.metric_violation().is_none(),
        "shortest-path distances satisfy the triangle inequality",
    );
    out.artifact("graph.json", emit_graph(&g));
    Ok(())
}

fn embed(config: &ExperimentConfig, out: &mut Outcome) -> Result<(), HarnessError> {
    let family = family(config)?;
    let table = separation_table(&family)?;
    let dist = embedding_distortion(&table, &family)?;
    let bound = distortion_bound(config.n);
    let edge_p = q_frac(1, 1 << config.k);
    let g = family.graph();
    let bad_edge = g
        .edges()
        .iter()
        .find(|e| *table.probability(e.u, e.v) != edge_p);

    let mut cases: std::collections::BTreeMap<&str, usize> = Default::default();
    for (u, v) in family.dist().pairs() {
        if let Some(c) = table.case(u, v) {
            *cases.entry(c.tag()).or_default() += 1;
        }
    }
    out.result("vertices", json!(g.vertex_count()));
    out.result("distortion", json!(format_q(&dist.value)));
    out.result("expansion", json!(format_q(&dist.expansion)));
    out.result("contraction", json!(format_q(&dist.contraction)));
    out.result("bound", json!(format_q(&bound)));
    out.result("cases", json!(cases));
    out.check(
        "distortion-bound",
        dist.value <= bound,
        format!("distortion {} against 2 - 2/(2 ceil(n/2) + 1) = {}", format_q(&dist.value), format_q(&bound)),
    );
    out.check(
        "edge-separation",
        bad_edge.is_none(),
        match bad_edge {
            Some(e) => format!("edge ({}, {}) separated with probability {}", e.u, e.v, format_q(table.probability(e.u, e.v))),
            None => format!("every edge separated with probability {}", format_q(&edge_p)),
        },
    );
    out.artifact("separation.csv", table.to_csv());

    if let Some(seed) = config.seed {
        let counts = monte_carlo(&family, config.samples, seed);
        let cmp = compare_monte_carlo(&table, &counts, config.z_limit);
        out.result(
            "monte_carlo",
            json!({
                "samples": config.samples,
                "seed": seed,
                "pairs": cmp.pairs,
                "max_z": cmp.max_z,
                "violations": cmp.violations.len(),
            }),
        );
        out.check(
            "monte-carlo",
            cmp.passed(),
            format!("max |z| = {:.3} over {} pairs, limit {}", cmp.max_z, cmp.pairs, config.z_limit),
        );
        let sample = sample_recursive_cut(&family, sample_seed(seed, 0));
        out.artifact("sample.csv", emit_sample_csv(g, &sample));
    }
    Ok(())
}

fn c1(config: &ExperimentConfig, out: &mut Outcome) -> Result<(), HarnessError> {
    let g = host(config)?;
    if g.vertex_count() > C1_MAX_VERTICES {
        return Err(HarnessError::Budget(format!(
            "c1 handles at most {C1_MAX_VERTICES} vertices, graph has {}",
            g.vertex_count()
        )));
    }
    let d = all_pairs_distances(&g);
    let sol = c1_lp(&d)?;
    let round = distortion(&sol.measure, &d.to_f64())?;
    out.result("c1", serde_json::to_value(sol.summary()).expect("summary serialises"));
    out.result("round_trip", json!(round.value));
    out.check(
        "round-trip",
        (round.value - sol.value).abs() <= 1e-6,
        format!("measure distortion {} against LP value {}", round.value, sol.value),
    );
    out.check("at-least-one", sol.value >= 1.0 - 1e-9, format!("value {}", sol.value));
    if config.mode == ScalarMode::Rational {
        let exact = distortion(&rationalise(&sol.measure), &d)?;
        let close = (exact.value.to_f64() - sol.value).abs() <= 1e-6;
        out.result("round_trip_exact", json!(format_q(&exact.value)));
        out.check("round-trip-exact", close, format!("exact distortion {}", format_q(&exact.value)));
    }
    if let Ok(family) = family(config) {
        let table = separation_table(&family)?;
        let emb = embedding_distortion(&table, &family)?.value;
        out.result("embedding_distortion", json!(format_q(&emb)));
        out.check(
            "below-embedding",
            sol.value <= emb.to_f64() + 1e-6,
            format!("c1 {} against the random-cut embedding {}", sol.value, format_q(&emb)),
        );
    }
    out.artifact("measure.json", emit_measure(&sol.measure));
    Ok(())
}

/// Exact copy of a double-precision measure.
fn rationalise(mu: &CutMeasure<f64>) -> CutMeasure<Q> {
    let mut exact = CutMeasure::new(mu.ground_size());
    for atom in mu.atoms() {
        let w = Q::from_float(atom.weight).expect("finite weight");
        exact.add(&atom.side, w).expect("atom already validated");
    }
    exact
}

fn flowcut(config: &ExperimentConfig, out: &mut Outcome) -> Result<(), HarnessError> {
    let inst = match (&config.input, config.seed) {
        (Some(path), _) => parse_instance(&read_input(path)?)?,
        (None, Some(seed)) => random_instance(host(config)?, config.commodities, MAX_CAPACITY, MAX_DEMAND, seed)?,
        (None, None) => unreachable!("validated"),
    };
    let g = inst.graph();
    let reference = if g.vertex_count() <= C1_REFERENCE_MAX_VERTICES {
        Some(c1_lp(&all_pairs_distances(g))?.value)
    } else {
        None
    };
    out.result("vertices", json!(g.vertex_count()));
    out.result("commodities", json!(inst.commodities().len()));
    out.artifact("instance.json", emit_instance(&inst));
    let report: GapReport = match gap_report(&inst, reference) {
        Ok(r) => r,
        Err(LpError::WeakDuality { lambda, phi }) => {
            out.check("weak-duality", false, format!("flow {lambda} exceeds cut {phi}"));
            return Ok(());
        }
        Err(e) => return Err(e.into()),
    };
    out.check(
        "weak-duality",
        true,
        format!("lambda {} <= phi {}", report.lambda, report.phi),
    );
    out.check("ratio-at-least-one", report.ratio >= 1.0 - 1e-9, format!("ratio {}", report.ratio));
    if let (Some(c), Some(within)) = (report.c1_reference, report.within_c1) {
        out.check("ratio-below-c1", within, format!("ratio {} against c1 {c}", report.ratio));
    }
    out.result("gap", serde_json::to_value(&report).expect("gap serialises"));
    out.artifact("gap.csv", format!("{}\n{}\n", GapReport::csv_header(), report.csv_row()));
    Ok(())
}

fn read_input(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path)
        .map_err(|e| HarnessError::InvalidConfig(format!("cannot read {}: {e}", path.display())))
}

/// Scales `f` so its largest stretch is 1. Returns the scaled map, the
/// factor divided out and the distortion (infinite when `f` collapses a
/// pair).
fn normalise<T: Scalar>(
    f: &DistanceMatrix<T>,
    d: &DistanceMatrix<T>,
) -> Result<(DistanceMatrix<T>, T, Extended<T>), HarnessError> {
    let expansion = d
        .pairs()
        .map(|(u, v)| f.get(u, v).clone() / d.get(u, v).clone())
        .fold(T::zero(), |a, b| if b > a { b } else { a });
    if !expansion.is_positive() {
        return Err(HarnessError::Failed("map collapses every pair".into()));
    }
    let scaled = f.map(|x| x.clone() / expansion.clone());
    let measured = match distortion(&scaled, d) {
        Ok(dist) => Extended::Finite(dist.value),
        Err(CutError::NonInjective(..)) => Extended::Infinite,
        Err(e) => return Err(e.into()),
    };
    Ok((scaled, expansion, measured))
}

fn audit_run<T: Scalar>(config: &ExperimentConfig, out: &mut Outcome) -> Result<(), HarnessError> {
    let eps = T::from_q(&config.eps_q()?.unwrap_or_else(|| q_frac(1, 10)));
    let delta = T::from_q(&config.delta_q()?.unwrap_or_else(|| q_frac(1, 10)));
    let m = config.granularity.unwrap_or(2);
    let hops = 1usize << config.k;
    let levels = (1..=config.k as u32)
        .find(|&l| m.checked_pow(l) == Some(hops))
        .ok_or_else(|| {
            HarnessError::InvalidConfig(format!("geodesics have {hops} hops, not a power of granularity {m}"))
        })?;

    let g = host(config)?;
    let d = all_pairs_distances(&g);
    let dt = convert_metric::<T>(&d);
    let raw: DistanceMatrix<T> = match config.map {
        AuditMap::Embedding => {
            let family = family(config)?;
            convert_metric(&separation_table(&family)?.scaled_metric(&family))
        }
        AuditMap::Fold => fold_map(&dt, g.s(), g.t()),
        AuditMap::C1 => {
            if g.vertex_count() > C1_MAX_VERTICES {
                return Err(HarnessError::Budget(format!(
                    "c1 handles at most {C1_MAX_VERTICES} vertices, graph has {}",
                    g.vertex_count()
                )));
            }
            let sol = c1_lp(&d)?;
            let mu = rationalise(&sol.measure);
            convert_metric(&mu.to_matrix())
        }
    };
    let (f, scale, measured) = normalise(&raw, &dt)?;

    let family = st_geodesics(&g, DEFAULT_GEODESIC_CAP, config.seed.unwrap_or(0));
    if !family.exhaustive && config.seed.is_none() {
        return Err(HarnessError::InvalidConfig(format!(
            "{} geodesics exceed the enumeration cap; sampling needs --seed",
            family.total
        )));
    }
    let (cert, census) = audit(&f, &dt, &family.paths, m, &eps, &delta, levels, &measured, config.mode)?;
    out.result("map", json!(config.map));
    out.result("scale", json!(scale.to_text()));
    out.result("measured", json!(measured.to_text()));
    out.result("levels", json!(levels));
    out.result("granularity", json!(m));
    out.result("geodesics", json!(family.total.to_string()));
    out.result("sampled", json!(!family.exhaustive));
    out.result("inefficient_levels", json!(census.inefficient_levels(&delta)));
    out.check(
        "differentiation-bound",
        cert.status == CertificateStatus::Pass,
        format!("measured {} against bound {}", measured.to_text(), cert.bound),
    );
    check_recompute(out, &cert);
    out.artifact("census.csv", census.to_csv());
    out.certificates.push(cert);
    Ok(())
}

fn check_recompute(out: &mut Outcome, cert: &Certificate) {
    let again = cert.recompute_bound();
    out.check(
        "certificate-recomputes",
        again.as_deref() == Ok(cert.bound.as_str()),
        format!("stored {} recomputed {:?}", cert.bound, again),
    );
}

/// Base-cut law of `K_{2,n}` as a measure.
fn base_measure<T: Scalar>(family: &RecursiveFamily) -> CutMeasure<T> {
    let law = family.law();
    let w = T::from_q(&law.atom_probability());
    let mut mu = CutMeasure::new(law.middles() + 2);
    for i in 0..law.support().len() {
        mu.add(&law.side(i), w.clone()).expect("support sides are proper");
    }
    mu
}

fn certify<T: Scalar>(config: &ExperimentConfig, out: &mut Outcome) -> Result<(), HarnessError> {
    let eps_q = config.eps_q()?.unwrap_or_else(|| q_int(0));
    let eps = T::from_q(&eps_q);
    let base = RecursiveFamily::with_budget(config.n, 1, config.budget_vertices as u128)?;
    let mu: CutMeasure<T> = match &config.input {
        Some(path) => parse_measure(&read_input(path)?)?,
        None => base_measure(&base),
    };
    let check = k2n_certificate(&mu, config.n, &eps, config.mode)?;
    out.result("measure_atoms", json!(mu.atoms().len()));
    out.result("hypothesis", json!(check.hypothesis));
    out.result("measured", json!(check.measured.to_text()));
    out.result("bound", json!(check.bound.to_text()));
    out.check(
        "k2n-lower-bound",
        !check.hypothesis || check.certificate.status == CertificateStatus::Pass,
        format!(
            "distortion {} against 2 - 2/n - 2 eps = {} (hypothesis {})",
            check.measured.to_text(),
            check.bound.to_text(),
            check.hypothesis
        ),
    );
    out.check("middle-identity", check.middle_identity, "sum of middle distances equals n(n-1) d(s,t)");
    out.check("cut-counts", check.cut_counts, "every atom separates at most n^2/2 ordered middle pairs");
    check_recompute(out, &check.certificate);
    out.certificates.push(check.certificate);

    if config.k >= 2 && eps_q > q_int(0) {
        let family = family(config)?;
        let d = family.dist();
        let dt = convert_metric::<T>(d);
        let raw = convert_metric::<T>(&separation_table(&family)?.scaled_metric(&family));
        let (f, _, measured) = normalise(&raw, &dt)?;
        let search = find_efficient_copy(&f, family.graph(), &dt, &eps, DEFAULT_GEODESIC_CAP, config.seed.unwrap_or(0))?;
        if search.sampled && config.seed.is_none() {
            return Err(HarnessError::InvalidConfig("template geodesics are sampled; pass --seed".into()));
        }
        let budget = measured.finite().cloned().unwrap_or_else(T::one);
        let cert = search.certificate(config.mode, &budget, &eps);
        let scans: Vec<Value> = search
            .scans
            .iter()
            .map(|s| json!({"level": s.level, "copies": s.copies, "efficient": s.efficient}))
            .collect();
        out.result("copy_scans", Value::Array(scans));
        if let Some(copy) = &search.copy {
            let info = family.graph().power_info().expect("power graph");
            let template = all_pairs_distances(&info.template);
            let verified = verify_copy(d, &copy.vertex_map, &template);
            out.result("copy_level", json!(copy.level));
            out.check(
                "copy-isometric",
                verified.is_ok(),
                match &verified {
                    Ok(c) => format!("scaled copy with factor {}", format_q(c)),
                    Err(v) => format!("{v:?}"),
                },
            );
        }
        check_recompute(out, &cert);
        out.certificates.push(cert);
    }
    Ok(())
}
