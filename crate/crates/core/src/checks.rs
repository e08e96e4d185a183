//! Batch runner: parses a config of `[check]` blocks, runs each check from
//! its seed and collects a report.
//!
//! Config syntax, one check per block:
//!
//! ```text
//! # comment
//! [check]
//! id = gamma-generators
//! kind = invariance
//! target = gamma(alpha=1/12)
//! seed = 7
//! path = exact
//! draws = 20
//! ```
//!
//! Keys other than `id`, `kind`, `target`, `seed` and `path` are passed to
//! the check as parameters. `expect = fail` turns a check into a negative
//! control: it passes exactly when the underlying certificate fails.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::catalog::{self, GeneratorKind, PParams, PSign, QuadricFamily, QuadricParams, TailReading, TransitiveSolution};
use crate::chern_moser::{self, HermitianForm, Umbilicity};
use crate::eigen::Signature;
use crate::exact_arith::{int, parse_rational, rational_to_f64, ComplexFloat, GaussianRational, Rational};
use crate::geometry::{self, Side, SidedDomain};
use crate::lie::{self, LineImage, SubalgebraResult};
use crate::linalg;
use crate::maps::{self, invariance_certificate, HoloPolyMap, ScaledHoloMap};
use crate::polynomial::{HermitianPolynomial, VariableSpace};
use crate::registry::{RegistryError, RegistryId};

/// The shipped suite covering every acceptance criterion.
pub const DEFAULT_SUITE: &str = include_str!("../config/default_suite.cfg");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Invariance,
    Transitivity,
    Levi,
    ChernMoser,
    Lie,
    LineWitness,
    Closure,
    Rank,
}

impl CheckKind {
    pub const ALL: [CheckKind; 8] = [
        Self::Invariance,
        Self::Transitivity,
        Self::Levi,
        Self::ChernMoser,
        Self::Lie,
        Self::LineWitness,
        Self::Closure,
        Self::Rank,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Invariance => "invariance",
            Self::Transitivity => "transitivity",
            Self::Levi => "levi",
            Self::ChernMoser => "chern_moser",
            Self::Lie => "lie",
            Self::LineWitness => "line_witness",
            Self::Closure => "closure",
            Self::Rank => "rank",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PathMode {
    Exact,
    Float,
    Both,
}

impl PathMode {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "exact" => Some(Self::Exact),
            "float" => Some(Self::Float),
            "both" => Some(Self::Both),
            _ => None,
        }
    }

    fn exact(self) -> bool {
        self != Self::Float
    }

    fn float(self) -> bool {
        self != Self::Exact
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckSpec {
    pub id: String,
    pub kind: CheckKind,
    pub target: String,
    pub parameters: BTreeMap<String, String>,
    pub seed: u64,
    pub path: PathMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Self::Pass => "pass",
            Self::Fail => "fail",
            Self::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub id: String,
    pub kind: CheckKind,
    pub target: String,
    pub status: Status,
    pub details: Value,
    pub wall_time_ms: u64,
}

impl CheckResult {
    pub fn to_json(&self, include_timing: bool) -> Value {
        let mut v = json!({
            "id": self.id,
            "kind": self.kind.name(),
            "target": self.target,
            "status": self.status.name(),
            "details": self.details,
        });
        if include_timing {
            v["wall_time_ms"] = json!(self.wall_time_ms);
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub results: Vec<CheckResult>,
    /// Set when `fail_fast` stopped the run early.
    pub aborted: bool,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.status == Status::Pass)
    }

    /// 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_pass() {
            0
        } else {
            1
        }
    }

    /// One JSON object per line.
    pub fn to_ndjson(&self, include_timing: bool) -> String {
        let mut out = String::new();
        for r in &self.results {
            out.push_str(&r.to_json(include_timing).to_string());
            out.push('\n');
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| id | kind | target | status | summary | ms |\n|---|---|---|---|---|---|\n");
        for r in &self.results {
            let summary = r.details.get("summary").and_then(Value::as_str).unwrap_or("");
            out.push_str(&format!(
                "| {} | {} | `{}` | {} | {} | {} |\n",
                r.id,
                r.kind,
                r.target,
                r.status.name(),
                summary.replace('|', "\\|"),
                r.wall_time_ms
            ));
        }
        let passed = self.results.iter().filter(|r| r.status == Status::Pass).count();
        out.push_str(&format!("\n{passed}/{} checks passed", self.results.len()));
        if self.aborted {
            out.push_str(" (stopped at first failure)");
        }
        out.push('\n');
        out
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("check starting on line {line}: missing `{key}`")]
    MissingKey { line: usize, key: &'static str },
    #[error("duplicate check id `{0}`")]
    DuplicateId(String),
    #[error("check `{id}`: {source}")]
    Unresolved {
        id: String,
        #[source]
        source: RegistryError,
    },
    #[error("check `{id}`: kind `{kind}` does not apply to `{target}`")]
    Unsupported { id: String, kind: CheckKind, target: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Default)]
struct Block {
    line: usize,
    keys: BTreeMap<String, String>,
}

impl Block {
    fn into_spec(mut self) -> Result<CheckSpec, ConfigError> {
        let line = self.line;
        let mut take = |key: &'static str| self.keys.remove(key).ok_or(ConfigError::MissingKey { line, key });
        let id = take("id")?;
        let kind_s = take("kind")?;
        let target = take("target")?;
        let kind = CheckKind::parse(&kind_s).ok_or_else(|| ConfigError::Syntax {
            line,
            message: format!("unknown kind `{kind_s}`"),
        })?;
        let seed = match self.keys.remove("seed") {
            None => 0,
            Some(s) => s.parse().map_err(|_| ConfigError::Syntax {
                line,
                message: format!("seed `{s}` is not a 64-bit unsigned integer"),
            })?,
        };
        let path = match self.keys.remove("path") {
            None => PathMode::Exact,
            Some(s) => PathMode::parse(&s).ok_or_else(|| ConfigError::Syntax {
                line,
                message: format!("path `{s}` is not exact, float or both"),
            })?,
        };
        Ok(CheckSpec {
            id,
            kind,
            target,
            parameters: self.keys,
            seed,
            path,
        })
    }
}

pub fn parse_config(text: &str) -> Result<Vec<CheckSpec>, ConfigError> {
    let mut blocks: Vec<Block> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        if s == "[check]" {
            blocks.push(Block { line, keys: BTreeMap::new() });
            continue;
        }
        let Some((k, v)) = s.split_once('=') else {
            return Err(ConfigError::Syntax { line, message: format!("expected `key = value`, got `{s}`") });
        };
        let Some(block) = blocks.last_mut() else {
            return Err(ConfigError::Syntax { line, message: "key outside a [check] block".into() });
        };
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        if k.is_empty() {
            return Err(ConfigError::Syntax { line, message: "empty key".into() });
        }
        if block.keys.insert(k.clone(), v).is_some() {
            return Err(ConfigError::Syntax { line, message: format!("key `{k}` repeated") });
        }
    }
    let mut seen = BTreeSet::new();
    let mut specs = Vec::new();
    for b in blocks {
        let spec = b.into_spec()?;
        if !seen.insert(spec.id.clone()) {
            return Err(ConfigError::DuplicateId(spec.id));
        }
        let target = RegistryId::parse(&spec.target).map_err(|source| ConfigError::Unresolved {
            id: spec.id.clone(),
            source,
        })?;
        if !supports(spec.kind, &target) {
            return Err(ConfigError::Unsupported {
                id: spec.id,
                kind: spec.kind,
                target: spec.target,
            });
        }
        specs.push(spec);
    }
    Ok(specs)
}

pub fn load_config(path: &Path) -> Result<Vec<CheckSpec>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_config(&text)
}

fn supports(kind: CheckKind, t: &RegistryId) -> bool {
    use RegistryId as R;
    match kind {
        CheckKind::Invariance => matches!(
            t,
            R::Gamma { .. } | R::PGroup(_) | R::Normalizer { .. } | R::Quadric { .. } | R::TubeRealisation { .. } | R::Cayley
        ),
        CheckKind::Transitivity => matches!(t, R::Omega { side: Side::Positive, .. } | R::Quadric { .. }),
        CheckKind::Levi => matches!(t, R::M(_) | R::Sigma { .. } | R::Quadric { .. }),
        CheckKind::ChernMoser => matches!(t, R::M(_)),
        CheckKind::Lie => matches!(t, R::Sl3 | R::Su21 | R::Isotropy),
        CheckKind::LineWitness => matches!(t, R::D { .. } | R::Quadric { .. }),
        CheckKind::Closure | CheckKind::Rank => matches!(t, R::PGroup(_)),
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses rayon's default.
    pub jobs: Option<usize>,
    pub fail_fast: bool,
    pub seed_override: Option<u64>,
}

/// Runs every check and returns results sorted by id.
pub fn run_checks(specs: &[CheckSpec], opts: &RunOptions) -> Report {
    let mut specs: Vec<CheckSpec> = specs.to_vec();
    if let Some(s) = opts.seed_override {
        for spec in &mut specs {
            spec.seed = s;
        }
    }
    specs.sort_by(|a, b| a.id.cmp(&b.id));
    if opts.fail_fast {
        let mut results = Vec::new();
        for spec in &specs {
            let r = run_check(spec);
            let stop = r.status != Status::Pass;
            results.push(r);
            if stop {
                let aborted = results.len() < specs.len();
                return Report { results, aborted };
            }
        }
        return Report { results, aborted: false };
    }
    let run = || specs.par_iter().map(run_check).collect::<Vec<_>>();
    let results = match opts.jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(run),
            Err(_) => specs.iter().map(run_check).collect(),
        },
        None => run(),
    };
    Report { results, aborted: false }
}

pub fn run_suite(path: &Path, opts: &RunOptions) -> Result<Report, ConfigError> {
    Ok(run_checks(&load_config(path)?, opts))
}

/// Runs one check. Panics inside the check become `status = error`.
pub fn run_check(spec: &CheckSpec) -> CheckResult {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(|| execute(spec)));
    let (status, details) = match outcome {
        Ok(Ok((pass, details))) => {
            let expect_fail = spec.parameters.get("expect").is_some_and(|e| e == "fail");
            let mut details = details;
            let status = if expect_fail {
                details["expected"] = json!("fail");
                details["observed"] = json!(if pass { "pass" } else { "fail" });
                if pass {
                    Status::Fail
                } else {
                    Status::Pass
                }
            } else if pass {
                Status::Pass
            } else {
                Status::Fail
            };
            (status, details)
        }
        Ok(Err(msg)) => (Status::Error, json!({ "summary": "error", "error": msg })),
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            (Status::Error, json!({ "summary": "panic", "error": msg }))
        }
    };
    CheckResult {
        id: spec.id.clone(),
        kind: spec.kind,
        target: spec.target.clone(),
        status,
        details,
        wall_time_ms: start.elapsed().as_millis() as u64,
    }
}

type Outcome = Result<(bool, Value), String>;

struct Params<'a>(&'a BTreeMap<String, String>);

impl Params<'_> {
    fn count(&self, key: &str, default: usize) -> Result<usize, String> {
        self.0
            .get(key)
            .map_or(Ok(default), |v| v.parse().map_err(|_| format!("`{key} = {v}` is not a count")))
    }

    fn rational(&self, key: &str) -> Result<Option<Rational>, String> {
        self.0
            .get(key)
            .map(|v| parse_rational(v).map_err(|e| format!("`{key}`: {e}")))
            .transpose()
    }

    fn text(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn signature(&self, key: &str) -> Result<Option<Signature>, String> {
        let Some(v) = self.text(key) else { return Ok(None) };
        let parts: Vec<&str> = v.split(',').map(str::trim).collect();
        match parts.as_slice() {
            [p, n] => {
                let p = p.parse().map_err(|_| format!("`{key} = {v}`"))?;
                let n = n.parse().map_err(|_| format!("`{key} = {v}`"))?;
                Ok(Some(Signature::new(p, n, 0)))
            }
            _ => Err(format!("`{key} = {v}` is not `p,q`")),
        }
    }
}

fn err<E: fmt::Display>(e: E) -> String {
    e.to_string()
}

fn execute(spec: &CheckSpec) -> Outcome {
    let target = RegistryId::parse(&spec.target).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let p = Params(&spec.parameters);
    match spec.kind {
        CheckKind::Invariance => invariance(&target, &p, spec.path, &mut rng),
        CheckKind::Transitivity => transitivity(&target, &p, spec.path, &mut rng),
        CheckKind::Levi => levi(&target, &p, &mut rng),
        CheckKind::ChernMoser => chern_moser_check(&target, &p, &mut rng),
        CheckKind::Lie => lie_check(&target, &p, &mut rng),
        CheckKind::LineWitness => line_witness(&target),
        CheckKind::Closure => closure(&target, &p, &mut rng),
        CheckKind::Rank => rank(&target, &p),
    }
}

fn nonzero_rational(rng: &mut ChaCha8Rng, lo: i64, hi: i64, max_den: i64) -> Rational {
    loop {
        let r = geometry::random_rational(rng, lo, hi, max_den);
        if r != int(0) {
            return r;
        }
    }
}

fn random_complex_points(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<Vec<ComplexFloat>> {
    (0..count)
        .map(|_| (0..n).map(|_| ComplexFloat::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
        .collect()
}

// ---------------------------------------------------------------------------
// invariance

fn invariance(t: &RegistryId, p: &Params, path: PathMode, rng: &mut ChaCha8Rng) -> Outcome {
    match t {
        RegistryId::Gamma { alpha } => gamma_invariance(alpha, p, rng),
        RegistryId::PGroup(sign) => p_invariance(*sign, p, rng),
        RegistryId::Normalizer { alpha } => {
            let nz = catalog::make_normalizer(alpha).map_err(err)?;
            let source = catalog::make_gamma(alpha).rho().clone();
            scaled_certificate(&nz.map, &nz.target, &source, nz.target_name, path, rng)
        }
        RegistryId::TubeRealisation { p: pp, n } => {
            let fam = QuadricFamily::new(*pp, *n).map_err(err)?;
            let map = catalog::make_tube_realisation(&fam).map_err(err)?;
            scaled_certificate(&map, &fam.tube_rho(), &fam.rho(), "tube", path, rng)
        }
        RegistryId::Cayley => {
            let c = catalog::make_cayley_objects().map_err(err)?;
            scaled_certificate(&c.map, &c.target, c.surface.rho(), "quadric(p=1,n=2)", path, rng)
        }
        RegistryId::Quadric { p: pp, n, .. } => quadric_invariance(*pp, *n, p, rng),
        _ => Err("unsupported target".into()),
    }
}

fn gamma_invariance(alpha: &Rational, p: &Params, rng: &mut ChaCha8Rng) -> Outcome {
    let draws = p.count("draws", 20)?;
    let rho = catalog::make_gamma(alpha).rho().clone();
    let mut per = serde_json::Map::new();
    let mut all = true;
    let mut first_failure = Value::Null;
    for kind in GeneratorKind::ALL {
        let mut ok = 0usize;
        for _ in 0..draws {
            let param = nonzero_rational(rng, -4, 4, 9);
            let g = maps::lift_affine(&catalog::make_generator(kind, alpha, &param).map_err(err)?);
            let cert = invariance_certificate(&rho, &g).map_err(err)?;
            let expect = if kind == GeneratorKind::Phi { param.pow(4) } else { int(1) };
            if cert.exact && cert.factor == GaussianRational::real(expect) {
                ok += 1;
            } else if first_failure.is_null() {
                first_failure = json!({
                    "generator": kind.name(),
                    "param": param.to_string(),
                    "certificate": cert.summary(),
                });
            }
        }
        all &= ok == draws;
        per.insert(kind.name().into(), json!({ "draws": draws, "certified": ok }));
    }
    Ok((
        all,
        json!({
            "summary": format!("{} generators x {draws} draws, factors q^4,1,1,1", GeneratorKind::ALL.len()),
            "exact": all,
            "factor": "q^4 (phi), 1 (psi, mu, nu)",
            "generators": per,
            "first_failure": first_failure,
        }),
    ))
}

fn example_p_params(sign: PSign, d: Rational) -> PParams {
    PParams {
        sign,
        q: int(2),
        rho: GaussianRational::from_ints(1, 1),
        b: GaussianRational::from(-1),
        d: GaussianRational::real(d),
        ..PParams::identity(sign)
    }
}

fn p_invariance(sign: PSign, p: &Params, rng: &mut ChaCha8Rng) -> Outcome {
    let reading = match p.text("reading").unwrap_or("modulus") {
        "modulus" => TailReading::Modulus,
        "modulus_free" => TailReading::ModulusFree,
        other => return Err(format!("unknown reading `{other}`")),
    };
    let rho = catalog::m_pm_rho(sign);
    let fixed = p.rational("d")?;
    let perturb = p.rational("perturb_d")?;
    let draws = if fixed.is_some() { 1 } else { p.count("draws", 50)? };
    let mut certified = 0usize;
    let mut first = Value::Null;
    let mut first_failure = Value::Null;
    for _ in 0..draws {
        let mut params = match &fixed {
            Some(d) => example_p_params(sign, d.clone()),
            None => catalog::random_p_params(rng, sign),
        };
        if let Some(k) = &perturb {
            // redraw until the shifted d breaks the constraint
            loop {
                params.d = &params.d + &GaussianRational::real(k.clone());
                if params.check().is_err() {
                    break;
                }
                params = catalog::random_p_params(rng, sign);
            }
        }
        let constraint_defect = params.constraint_defect();
        let f = catalog::make_p_element_unchecked(&params, reading);
        let cert = invariance_certificate(&rho, &f).map_err(err)?;
        let ok = cert.exact && cert.factor == GaussianRational::real(params.q.pow(4));
        if first.is_null() {
            first = json!({ "q": params.q.to_string(), "certificate": cert.summary() });
        }
        if ok {
            certified += 1;
        } else if first_failure.is_null() {
            first_failure = json!({
                "q": params.q.to_string(),
                "d": params.d.to_string(),
                "constraint_defect": constraint_defect.to_string(),
                "certificate": cert.summary(),
            });
        }
    }
    let pass = certified == draws;
    let reading_name = match reading {
        TailReading::Modulus => "modulus",
        TailReading::ModulusFree => "modulus_free",
    };
    Ok((
        pass,
        json!({
            "summary": format!("{certified}/{draws} draws certify with factor q^4 ({reading_name} tail)"),
            "exact": pass,
            "factor": "q^4",
            "draws": draws,
            "certified": certified,
            "reading": reading_name,
            "first_draw": first,
            "first_failure": first_failure,
        }),
    ))
}

fn scaled_certificate(
    map: &ScaledHoloMap,
    target: &HermitianPolynomial,
    source: &HermitianPolynomial,
    target_name: &str,
    path: PathMode,
    rng: &mut ChaCha8Rng,
) -> Outcome {
    let cert = map.certify(target, source).map_err(err)?;
    let factor_positive = cert.preserves_sides();
    let mut pass = true;
    let mut details = json!({
        "target_name": target_name,
        "factor": cert.factor.to_string(),
        "exact": cert.exact,
        "residual_terms": cert.residual.num_terms(),
        "scales": map.scales.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
    });
    if path.exact() {
        pass &= factor_positive;
    }
    if path.float() {
        let factor = rational_to_f64(&cert.factor.re);
        let pts = random_complex_points(rng, source.space().n(), 20);
        let res = map.float_residual(target, source, factor, &pts).map_err(err)?;
        details["float_residual"] = json!(format!("{res:.3e}"));
        pass &= res < 1e-9;
    }
    details["summary"] = json!(format!(
        "factor {} exact {} into {target_name}",
        cert.factor,
        cert.exact
    ));
    Ok((pass, details))
}

fn random_quadric_element(fam: &QuadricFamily, rng: &mut ChaCha8Rng) -> Result<(Rational, Vec<GaussianRational>, Rational, HoloPolyMap), String> {
    let a = nonzero_rational(rng, -3, 3, 5);
    let b: Vec<GaussianRational> = (0..fam.n).map(|_| geometry::random_gaussian(rng, -2, 2, 6)).collect();
    let c = geometry::random_rational(rng, -3, 3, 7);
    let f = catalog::quadric_transitive_map(fam, &a, &b, &c).map_err(err)?;
    Ok((a, b, c, f))
}

fn quadric_invariance(pp: usize, n: usize, p: &Params, rng: &mut ChaCha8Rng) -> Outcome {
    let fam = QuadricFamily::new(pp, n).map_err(err)?;
    let rho = fam.rho();
    let draws = p.count("draws", 20)?;
    let mut certified = 0;
    let mut first_failure = Value::Null;
    for _ in 0..draws {
        let (a, _, _, f) = random_quadric_element(&fam, rng)?;
        let cert = invariance_certificate(&rho, &f).map_err(err)?;
        if cert.exact && cert.factor == GaussianRational::real(&a * &a) {
            certified += 1;
        } else if first_failure.is_null() {
            first_failure = json!({ "a": a.to_string(), "certificate": cert.summary() });
        }
    }
    let pass = certified == draws;
    Ok((
        pass,
        json!({
            "summary": format!("{certified}/{draws} transitive maps certify with factor a^2"),
            "exact": pass,
            "factor": "a^2",
            "draws": draws,
            "first_failure": first_failure,
        }),
    ))
}

// ---------------------------------------------------------------------------
// transitivity

fn transitivity(t: &RegistryId, p: &Params, path: PathMode, rng: &mut ChaCha8Rng) -> Outcome {
    match t {
        RegistryId::Omega { alpha, .. } => omega_transitivity(alpha, p, path, rng),
        RegistryId::Quadric { p: pp, n, side } => quadric_transitivity(*pp, *n, *side, p, rng),
        _ => Err("unsupported target".into()),
    }
}

fn omega_transitivity(alpha: &Rational, p: &Params, path: PathMode, rng: &mut ChaCha8Rng) -> Outcome {
    let mut details = serde_json::Map::new();
    let mut pass = true;
    let base: Vec<Rational> = catalog::omega_base_point();
    if path.exact() {
        let draws = p.count("exact_draws", 100)?;
        let mut reproduced = 0;
        let mut first_failure = Value::Null;
        for _ in 0..draws {
            let q = geometry::random_rational(rng, 1, 3, 4);
            let (r, s, tt) = (
                geometry::random_rational(rng, -3, 3, 6),
                geometry::random_rational(rng, -3, 3, 6),
                geometry::random_rational(rng, -3, 3, 6),
            );
            let g = catalog::composed_generator(alpha, &q, &r, &s, &tt).map_err(err)?;
            let target = g.apply(&base);
            match catalog::transitive_params_omega(alpha, &target).map_err(err)? {
                TransitiveSolution::Exact { map, .. } if map.apply(&base) == target => reproduced += 1,
                other => {
                    if first_failure.is_null() {
                        first_failure = json!({
                            "target": target.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                            "solution": format!("{other:?}"),
                        });
                    }
                }
            }
        }
        pass &= reproduced == draws;
        details.insert("exact".into(), json!({ "draws": draws, "reproduced": reproduced, "first_failure": first_failure }));
        if *alpha == int(1) {
            let target: Vec<Rational> = [1, 0, 0, 2].into_iter().map(int).collect();
            let ok = match catalog::transitive_params_omega(alpha, &target).map_err(err)? {
                TransitiveSolution::Exact { params, map } => {
                    params.q == int(1) && params.r == int(1) && params.s == int(6) && params.t == int(2) && map.apply(&base) == target
                }
                TransitiveSolution::Float { .. } => false,
            };
            pass &= ok;
            details.insert("regression_1_0_0_2".into(), json!({ "expected": "(q,r,s,t) = (1,1,6,2)", "pass": ok }));
        }
    }
    if path.float() {
        let draws = p.count("float_draws", 100)?;
        let a = rational_to_f64(alpha);
        let fam = catalog::GammaFamily::new(alpha.clone());
        let mut worst = 0.0f64;
        let mut solved = 0;
        for _ in 0..draws {
            let mut x = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), 0.0];
            let height = rng.gen_range(0.05..5.0);
            x[3] = height - fam.graph_polynomial_float(&x);
            if let TransitiveSolution::Float { error, .. } = catalog::transitive_params_omega_float(a, &x).map_err(err)? {
                worst = worst.max(error);
                solved += 1;
            }
        }
        pass &= solved == draws && worst <= 1e-9;
        details.insert("float".into(), json!({ "draws": draws, "sup_error": format!("{worst:.3e}"), "tolerance": "1e-9" }));
    }
    details.insert("summary".into(), json!(format!("closed-form solution reaches targets ({})", if pass { "all" } else { "not all" })));
    Ok((pass, Value::Object(details)))
}

fn quadric_transitivity(pp: usize, n: usize, side: Side, p: &Params, rng: &mut ChaCha8Rng) -> Outcome {
    let fam = QuadricFamily::new(pp, n).map_err(err)?;
    let draws = p.count("draws", 20)?;
    let base = catalog::quadric_base_point(&fam, side);
    let mut reproduced = 0;
    for _ in 0..draws {
        let (_, _, _, f) = random_quadric_element(&fam, rng)?;
        let target = f.apply(&base).map_err(err)?;
        if let QuadricParams::Exact { a, b, c } = catalog::quadric_transitive_params(&fam, side, &target).map_err(err)? {
            let g = catalog::quadric_transitive_map(&fam, &a, &b, &c).map_err(err)?;
            if g.apply(&base).map_err(err)? == target {
                reproduced += 1;
            }
        }
    }
    Ok((
        reproduced == draws,
        json!({
            "summary": format!("{reproduced}/{draws} targets reached exactly"),
            "draws": draws,
            "reproduced": reproduced,
        }),
    ))
}

// ---------------------------------------------------------------------------
// levi

fn levi(t: &RegistryId, p: &Params, rng: &mut ChaCha8Rng) -> Outcome {
    let margin_min = 1e-9;
    match t {
        RegistryId::Sigma { sigma } => {
            let f = catalog::make_sigma_surface(*sigma).map_err(err)?;
            let expect = p.signature("signature")?.unwrap_or(Signature::new(5, 2, 0));
            let points = p.count("points", 20)?;
            let mut matched = 0;
            let mut worst_margin = f64::INFINITY;
            let mut first_failure = Value::Null;
            for _ in 0..points {
                let x: Vec<f64> = (0..7).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let (sig, ev) = geometry::tube_hessian_signature(&f, &x);
                let radius = crate::eigen::spectral_radius(&ev);
                let margin = ev.iter().fold(f64::INFINITY, |a, v| a.min(v.abs())) / radius;
                worst_margin = worst_margin.min(margin);
                if sig == expect && margin > margin_min {
                    matched += 1;
                } else if first_failure.is_null() {
                    first_failure = json!({ "point": x, "signature": sig });
                }
            }
            Ok((
                matched == points,
                json!({
                    "summary": format!("Hessian signature {expect} at {matched}/{points} points"),
                    "signature": expect,
                    "points": points,
                    "worst_margin": format!("{worst_margin:.3e}"),
                    "first_failure": first_failure,
                }),
            ))
        }
        RegistryId::M(_) | RegistryId::Quadric { .. } => {
            let (rho, side, default) = match t {
                RegistryId::M(sign) => (catalog::m_pm_rho(*sign), Side::Positive, Some(Signature::new(2, 1, 0))),
                RegistryId::Quadric { p: pp, n, side } => (QuadricFamily::new(*pp, *n).map_err(err)?.rho(), *side, None),
                _ => unreachable!(),
            };
            let expect = p
                .signature("signature")?
                .or(default)
                .ok_or("quadric Levi checks need `signature = p,q`")?;
            let surface = geometry::Hypersurface::new(rho.clone()).map_err(err)?;
            let n = rho.space().n();
            let samples = p.count("points", 50)?;
            let mut pts = vec![vec![GaussianRational::from(0); n]];
            for _ in 0..samples {
                pts.push(geometry::sample_graph_boundary_point(&rho, rng).map_err(err)?);
            }
            let mut matched = 0;
            let mut worst_margin = f64::INFINITY;
            let mut first_failure = Value::Null;
            for pt in &pts {
                let pf: Vec<ComplexFloat> = pt.iter().map(GaussianRational::to_float).collect();
                let l = geometry::levi_form_sided(&surface, side, &pf).map_err(err)?;
                let margin = l.nondegeneracy_margin();
                worst_margin = worst_margin.min(margin);
                if l.signature == expect && margin > margin_min {
                    matched += 1;
                } else if first_failure.is_null() {
                    first_failure = json!({ "point": pt.iter().map(|z| z.to_string()).collect::<Vec<_>>(), "signature": l.signature });
                }
            }
            Ok((
                matched == pts.len(),
                json!({
                    "summary": format!("Levi signature {expect} at {matched}/{} points (origin included)", pts.len()),
                    "signature": expect,
                    "points": pts.len(),
                    "worst_margin": format!("{worst_margin:.3e}"),
                    "first_failure": first_failure,
                }),
            ))
        }
        _ => Err("unsupported target".into()),
    }
}

// ---------------------------------------------------------------------------
// chern_moser

fn chern_moser_check(t: &RegistryId, p: &Params, rng: &mut ChaCha8Rng) -> Outcome {
    let RegistryId::M(sign) = t else { return Err("unsupported target".into()) };
    let s = chern_moser::m_pm_normal_form(sign.value());
    let report = chern_moser::normal_form_check(&s).map_err(err)?;
    let sp = VariableSpace::new(3);
    let expected_witness = HermitianPolynomial::abs2(sp, 0).pow(2).scale_rational(&int(sign.value()));
    let umb = chern_moser::umbilicity_at_origin(&s);
    let witness_ok = umb == Umbilicity::NonUmbilic { witness: expected_witness.to_string() };
    let form = HermitianForm::pairing();
    let q = form.polynomial();
    let draws = p.count("draws", 10)?;
    let mut identity_ok = 0;
    for _ in 0..draws {
        let c = nonzero_rational(rng, -5, 5, 7);
        let lhs = chern_moser::trace_op(&(&q * &q).scale_rational(&c), &form).map_err(err)?;
        if lhs == q.scale_rational(&(c * int(8))) {
            identity_ok += 1;
        }
    }
    let pass = report.all_pass() && witness_ok && identity_ok == draws;
    Ok((
        pass,
        json!({
            "summary": format!(
                "trace conditions {}, non-umbilic witness {}, tr(c<z,z>^2) = 8c<z,z> on {identity_ok}/{draws}",
                if report.all_pass() { "hold" } else { "fail" },
                if witness_ok { "matches" } else { "differs" }
            ),
            "conditions": report.conditions,
            "umbilicity": format!("{umb:?}"),
            "expected_witness": expected_witness.to_string(),
            "trace_identity_constant": 8,
            "trace_identity_draws": draws,
            "trace_identity_holds": identity_ok,
        }),
    ))
}

// ---------------------------------------------------------------------------
// lie

fn lie_check(t: &RegistryId, p: &Params, rng: &mut ChaCha8Rng) -> Outcome {
    let test = p.text("test").ok_or("lie checks need `test`")?;
    let c = |re: i64, im: i64| GaussianRational::from_ints(re, im);
    match (t, test) {
        (RegistryId::Sl3, "killing") => {
            let r = linalg::rank(&lie::killing_gram(&lie::sl3_basis()));
            Ok((r == 8, json!({ "summary": format!("Killing Gram rank {r}"), "gram_rank": r })))
        }
        (RegistryId::Sl3, "jordan") => {
            let mut dims = serde_json::Map::new();
            let mut pass = true;
            for (i, (name, m)) in lie::jordan_test_set().iter().enumerate() {
                let d = lie::ad_kernel_dim(m, &lie::perp_of(m));
                pass &= if i == 0 { d >= 4 } else { d < 4 };
                dims.insert((*name).into(), json!(d));
            }
            let perp_sub = lie::is_subalgebra(&lie::perp_of(&lie::e(1, 2)));
            let not_sub = matches!(perp_sub, SubalgebraResult::No { .. });
            pass &= not_sub;
            Ok((
                pass,
                json!({
                    "summary": "ad-kernel on the perp is >= 4 only for E12; E12-perp is not a subalgebra",
                    "ad_kernel_dims": dims,
                    "e12_perp_subalgebra": format!("{perp_sub:?}"),
                }),
            ))
        }
        (RegistryId::Sl3, "candidates") => {
            let mut out = Vec::new();
            let mut pass = true;
            for (name, s) in [("first", lie::first_candidate()), ("second", lie::second_candidate())] {
                let sub = lie::is_subalgebra(&s) == SubalgebraResult::Yes;
                pass &= sub && s.dim() == 6;
                out.push(json!({ "name": name, "dim": s.dim(), "subalgebra": sub }));
            }
            Ok((pass, json!({ "summary": "both matrix patterns are 6-dimensional subalgebras", "candidates": out })))
        }
        (RegistryId::Su21, "dimensions") => {
            let mut out = Vec::new();
            let mut pass = true;
            for (name, f) in [("diag(1,1,-1)", HermitianForm::diagonal(&[1, 1, -1])), ("pairing", HermitianForm::pairing())] {
                let (u, su) = (lie::u21(&f).dim(), lie::su21(&f).dim());
                pass &= u == 9 && su == 8;
                out.push(json!({ "form": name, "u21": u, "su21": su }));
            }
            Ok((pass, json!({ "summary": "u(2,1) = 9, su(2,1) = 8", "forms": out })))
        }
        (RegistryId::Su21, "stabilizers") => {
            let f = HermitianForm::diagonal(&[1, 1, -1]);
            let reps = p.count("representatives", 10)?;
            let classes = [
                ("positive", [c(1, 0), c(0, 0), c(0, 0)], 4usize),
                ("negative", [c(0, 0), c(0, 0), c(1, 0)], 4),
                ("null", [c(1, 0), c(0, 0), c(1, 0)], 5),
            ];
            let mut pass = true;
            let mut out = Vec::new();
            for (name, v, expect) in classes {
                let mut dims = BTreeSet::new();
                for _ in 0..reps {
                    let g = lie::random_pseudo_unitary(rng);
                    if !f.preserved_by(&g) {
                        return Err("random element does not preserve the form".into());
                    }
                    dims.insert(lie::stabilizer_up_to_scale_dim(&lie::apply(&g, &v), &f).map_err(err)?);
                }
                pass &= dims.len() == 1 && dims.contains(&expect);
                out.push(json!({ "class": name, "expected": expect, "observed": dims.into_iter().collect::<Vec<_>>() }));
            }
            Ok((pass, json!({ "summary": format!("stabilizer dimensions 4, 4, 5 at {reps} representatives each"), "classes": out })))
        }
        (RegistryId::Isotropy, "matrices") => {
            let draws = p.count("draws", 50)?;
            let h = catalog::pairing_form();
            let mut ok = 0;
            for k in 0..draws {
                let sign = if k % 2 == 0 { PSign::Plus } else { PSign::Minus };
                let mut params = catalog::random_p_params(rng, sign);
                params.rho = GaussianRational::from(0);
                params.sigma = GaussianRational::from(0);
                params.tau = GaussianRational::from(0);
                params.u = int(0);
                let u = catalog::make_isotropy_matrix(&params).map_err(err)?;
                if catalog::is_zero_matrix(&catalog::pseudo_unitary_residual(&u, &h)) {
                    ok += 1;
                }
            }
            Ok((
                ok == draws,
                json!({ "summary": format!("U^t H conj(U) = H exactly on {ok}/{draws} draws"), "draws": draws, "zero_residual": ok }),
            ))
        }
        (RegistryId::Isotropy, "algebra") => {
            let s = lie::isotropy_algebra();
            let sub = lie::is_subalgebra(&s) == SubalgebraResult::Yes;
            let form = HermitianForm::pairing();
            let infinitesimal = s.basis().iter().all(|x| lie::preserves_form_infinitesimally(x, &form));
            let pass = s.dim() == 6 && sub && infinitesimal;
            Ok((
                pass,
                json!({
                    "summary": format!("isotropy algebra has dimension {}", s.dim()),
                    "dim": s.dim(),
                    "subalgebra": sub,
                    "preserves_form": infinitesimal,
                }),
            ))
        }
        (RegistryId::Isotropy, "line_image") => {
            let draws = p.count("draws", 50)?;
            let s = lie::isotropy_algebra();
            let mut agree = 0;
            let mut first_failure = Value::Null;
            for k in 0..draws {
                let on_line = k % 2 == 0;
                let w: Vec<GaussianRational> = if on_line {
                    let lam = loop {
                        let g = geometry::random_gaussian(rng, -3, 3, 5);
                        if g != GaussianRational::from(0) {
                            break g;
                        }
                    };
                    vec![c(0, 0), lam, c(0, 0)]
                } else {
                    loop {
                        let w: Vec<GaussianRational> = (0..3).map(|_| geometry::random_gaussian(rng, -3, 3, 5)).collect();
                        if w[0] != GaussianRational::from(0) || w[2] != GaussianRational::from(0) {
                            break w;
                        }
                    }
                };
                let verdict = lie::line_image_test(&s, &w);
                if (verdict == LineImage::ProportionalToV) == on_line {
                    agree += 1;
                } else if first_failure.is_null() {
                    first_failure = json!({ "w": w.iter().map(|x| x.to_string()).collect::<Vec<_>>(), "verdict": format!("{verdict:?}") });
                }
            }
            Ok((
                agree == draws,
                json!({
                    "summary": format!("proportional exactly on C(0,1,0): {agree}/{draws}"),
                    "draws": draws,
                    "agree": agree,
                    "first_failure": first_failure,
                }),
            ))
        }
        _ => Err(format!("unknown lie test `{test}` for this target")),
    }
}

// ---------------------------------------------------------------------------
// line_witness

fn line_witness(t: &RegistryId) -> Outcome {
    let domain: SidedDomain = match t {
        RegistryId::D { sign, side } => catalog::make_d_pm(*sign, *side),
        RegistryId::Quadric { p, n, side } => catalog::make_quadric_domain(*p, *n, *side).map_err(err)?,
        _ => return Err("unsupported target".into()),
    };
    let lines = t.complex_lines();
    if lines.is_empty() {
        return Err("no stated complex line for this domain".into());
    }
    let mut pass = true;
    let mut out = Vec::new();
    for (base, dir) in &lines {
        let w = geometry::contains_complex_line(&domain, base, dir, &geometry::default_line_samples()).map_err(err)?;
        pass &= w.samples_inside && w.exact_certificate;
        out.push(json!({
            "base": base.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            "direction": dir.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            "witness": w,
        }));
    }
    Ok((
        pass,
        json!({ "summary": format!("{} stated line(s) certified inside", lines.len()), "lines": out }),
    ))
}

// ---------------------------------------------------------------------------
// closure and rank

fn closure(t: &RegistryId, p: &Params, rng: &mut ChaCha8Rng) -> Outcome {
    let RegistryId::PGroup(sign) = t else { return Err("unsupported target".into()) };
    let sign = *sign;
    let pairs = p.count("pairs", 50)?;
    let inverses = p.count("inverses", 20)?;
    let id = PParams::identity(sign);
    let mut composed = 0;
    let mut first_failure = Value::Null;
    for _ in 0..pairs {
        let a = catalog::random_p_params(rng, sign);
        let b = catalog::random_p_params(rng, sign);
        match catalog::p_compose(&a, &b) {
            Ok(ab) if ab.q == &a.q * &b.q => composed += 1,
            other => {
                if first_failure.is_null() {
                    first_failure = json!(format!("{other:?}"));
                }
            }
        }
    }
    let mut inv_ok = 0;
    for _ in 0..inverses {
        let a = catalog::random_p_params(rng, sign);
        let ok = (|| -> Result<bool, catalog::CatalogError> {
            let inv = catalog::p_inverse(&a)?;
            Ok(catalog::p_compose(&id, &a)? == a
                && catalog::p_compose(&a, &id)? == a
                && catalog::p_compose(&a, &inv)? == id
                && catalog::p_compose(&inv, &a)? == id)
        })()
        .unwrap_or(false);
        if ok {
            inv_ok += 1;
        }
    }
    let identity_map = catalog::make_p_element(&id).map_err(err)? == HoloPolyMap::identity(VariableSpace::new(4));
    let pass = composed == pairs && inv_ok == inverses && identity_map;
    Ok((
        pass,
        json!({
            "summary": format!("{composed}/{pairs} compositions recovered exactly, {inv_ok}/{inverses} identity and inverse checks"),
            "pairs": pairs,
            "composed": composed,
            "inverses": inverses,
            "inverse_ok": inv_ok,
            "identity_is_identity_map": identity_map,
            "first_failure": first_failure,
        }),
    ))
}

fn rank(t: &RegistryId, p: &Params) -> Outcome {
    let RegistryId::PGroup(sign) = t else { return Err("unsupported target".into()) };
    let expect = p.count("expect_rank", catalog::P_CHART_DIM)?;
    let r = catalog::p_chart_rank(*sign, 1e-6, 1e-8);
    Ok((
        r.rank == expect,
        json!({
            "summary": format!("chart Jacobian rank {} of {}", r.rank, catalog::P_CHART_DIM),
            "rank": r.rank,
            "cutoff": "1e-8",
            "smallest_singular_value": format!("{:.3e}", r.singular_values.last().copied().unwrap_or(0.0)),
        }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_blocks_and_comments() {
        let cfg = "# top\n\n[check]\nid = a\nkind = rank\ntarget = P_plus # trailing\nseed = 3\n\n[check]\nid = b\nkind = levi\ntarget = sigma(σ=2)\npath = float\npoints = 4\n";
        let specs = parse_config(cfg).unwrap();
        assert_eq!(specs.len(), 2);
        assert_eq!(specs[0].seed, 3);
        assert_eq!(specs[1].path, PathMode::Float);
        assert_eq!(specs[1].parameters.get("points").map(String::as_str), Some("4"));
        assert!(parse_config("").unwrap().is_empty());
    }

    #[test]
    fn config_errors() {
        assert!(matches!(parse_config("id = x"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(parse_config("[check]\nid = x\nkind = rank"), Err(ConfigError::MissingKey { key: "target", .. })));
        let dup = "[check]\nid = x\nkind = rank\ntarget = P_plus\n[check]\nid = x\nkind = rank\ntarget = P_minus\n";
        assert!(matches!(parse_config(dup), Err(ConfigError::DuplicateId(_))));
        let bad = "[check]\nid = x\nkind = rank\ntarget = nowhere\n";
        match parse_config(bad) {
            Err(ConfigError::Unresolved { id, .. }) => assert_eq!(id, "x"),
            other => panic!("{other:?}"),
        }
        let unsupported = "[check]\nid = x\nkind = rank\ntarget = cayley\n";
        assert!(matches!(parse_config(unsupported), Err(ConfigError::Unsupported { .. })));
        assert!(matches!(parse_config("[check]\nid = x\nkind = nope\ntarget = cayley"), Err(ConfigError::Syntax { .. })));
    }

    #[test]
    fn negative_control_fails_and_expected_failure_passes() {
        let cfg = "[check]\nid = d5\nkind = invariance\ntarget = P_plus\nd = 5\n\n[check]\nid = d5-expected\nkind = invariance\ntarget = P_plus\nd = 5\nexpect = fail\n\n[check]\nid = d4\nkind = invariance\ntarget = P_minus\nd = 4\n";
        let report = run_checks(&parse_config(cfg).unwrap(), &RunOptions::default());
        let st: Vec<Status> = report.results.iter().map(|r| r.status).collect();
        assert_eq!(st, vec![Status::Pass, Status::Fail, Status::Pass]);
        assert_eq!(report.results[1].id, "d5");
        assert_eq!(report.exit_code(), 1);
        let d4 = &report.results[0].details;
        assert_eq!(d4["exact"], json!(true));
        assert_eq!(d4["first_draw"]["certificate"]["factor"], json!("16"));
    }

    #[test]
    fn bad_parameter_is_an_error_status() {
        let cfg = "[check]\nid = x\nkind = lie\ntarget = sl3\ntest = nothing\n";
        let report = run_checks(&parse_config(cfg).unwrap(), &RunOptions::default());
        assert_eq!(report.results[0].status, Status::Error);
    }

    #[test]
    fn fail_fast_stops() {
        let cfg = "[check]\nid = a\nkind = invariance\ntarget = P_plus\nd = 5\n[check]\nid = b\nkind = rank\ntarget = P_plus\n";
        let specs = parse_config(cfg).unwrap();
        let r = run_checks(&specs, &RunOptions { fail_fast: true, ..Default::default() });
        assert_eq!(r.results.len(), 1);
        assert!(r.aborted);
    }

    #[test]
    fn default_suite_parses_and_covers_every_kind() {
        let specs = parse_config(DEFAULT_SUITE).unwrap();
        for k in CheckKind::ALL {
            assert!(specs.iter().any(|s| s.kind == k), "{k}");
        }
    }
}
