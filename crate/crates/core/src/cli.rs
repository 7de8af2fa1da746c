//! Task configs, the runner behind the binary, and report rendering.

use std::fmt;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::affine::{
    action_from_cocycle, almost_fixed_point, delta_orbit_hull_check, fixed_points,
};
use crate::affine::{guichardet_criterion, quotient_displacement_check};
use crate::algebra::{
    class_average, class_sum, commutant_basis, uniform_average, GroupAlgebraElement,
};
use crate::approx::{
    almost_coboundary_witness, generator_average_decay, shrinking_average, Budget,
};
use crate::cochain::{Caps, Cochain, CochainComplex, Mode, DEFAULT_DEGREE_CAP, DEFAULT_FLAT_CAP};
use crate::error::Error;
use crate::fp::{abelianization, fp_almost_fixed_point, fp_cocycle_space, fp_fixed_points};
use crate::fp::{homomorphism_free_check, torsion_u64, FpModule};
use crate::group::{
    f_conjugacy_classes, fc_data, subgroup_closure, GroupRef, Subgroup, DEFAULT_ORDER_CAP,
};
use crate::homotopy::{
    contracting_homotopy, nowak_projection, restriction_nullifier, verify_homotopy_identity,
};
use crate::linalg::{exact, QMatrix};
use crate::module::{is_nonzero, random_vector, BanachModule};
use crate::rational::{fmt_q, q, Q};
use crate::spec::{self, FiniteSpec, GroupSpec};

/// Largest sample count accepted by the randomized tasks.
pub const SAMPLE_CAP: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Task {
    GroupInfo,
    FcData,
    Commutant,
    Cohomology,
    SplitCheck,
    HomotopyCheck,
    RestrictionCheck,
    AffineFixed,
    FpH1,
    ApproximationSuite,
    AppendixSuite,
}

impl Task {
    pub const ALL: [Task; 11] = [
        Task::GroupInfo,
        Task::FcData,
        Task::Commutant,
        Task::Cohomology,
        Task::SplitCheck,
        Task::HomotopyCheck,
        Task::RestrictionCheck,
        Task::AffineFixed,
        Task::FpH1,
        Task::ApproximationSuite,
        Task::AppendixSuite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::GroupInfo => "group-info",
            Task::FcData => "fc-data",
            Task::Commutant => "commutant",
            Task::Cohomology => "cohomology",
            Task::SplitCheck => "split-check",
            Task::HomotopyCheck => "homotopy-check",
            Task::RestrictionCheck => "restriction-check",
            Task::AffineFixed => "affine-fixed",
            Task::FpH1 => "fp-h1",
            Task::ApproximationSuite => "approximation-suite",
            Task::AppendixSuite => "appendix-suite",
        }
    }

    pub fn from_name(s: &str) -> Option<Task> {
        Task::ALL.into_iter().find(|t| t.name() == s)
    }

    /// Tasks that draw random samples and therefore need a seed.
    pub fn randomized(self) -> bool {
        matches!(
            self,
            Task::HomotopyCheck
                | Task::RestrictionCheck
                | Task::AffineFixed
                | Task::ApproximationSuite
                | Task::AppendixSuite
        )
    }

    fn needs_rep(self) -> bool {
        !matches!(self, Task::GroupInfo | Task::FcData | Task::Commutant)
    }

    fn default_degrees(self) -> Vec<usize> {
        match self {
            Task::Cohomology | Task::HomotopyCheck => vec![0, 1, 2],
            Task::SplitCheck => vec![0, 1, 2, 3],
            _ => vec![1],
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorCode {
    Task,
    Spec,
    Cap,
    Seed,
    Parse,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::Task => "E_TASK",
            ErrorCode::Spec => "E_SPEC",
            ErrorCode::Cap => "E_CAP",
            ErrorCode::Seed => "E_SEED",
            ErrorCode::Parse => "E_PARSE",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub code: ErrorCode,
    pub message: String,
    /// The violated cap, for `E_CAP`.
    pub cap: Option<usize>,
}

impl ConfigError {
    fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        ConfigError {
            code,
            message: message.into(),
            cap: None,
        }
    }

    fn cap(what: &str, requested: usize, cap: usize) -> Self {
        ConfigError {
            code: ErrorCode::Cap,
            message: format!("{what} = {requested} exceeds the cap {cap}"),
            cap: Some(cap),
        }
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("code".into(), json!(self.code.as_str()));
        m.insert("message".into(), json!(self.message));
        if let Some(c) = self.cap {
            m.insert("cap".into(), json!(c));
        }
        json!({ "error": Value::Object(m) })
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code.as_str(), self.message)
    }
}

impl std::error::Error for ConfigError {}

impl From<Error> for ConfigError {
    fn from(e: Error) -> Self {
        match e {
            Error::GroupTooLarge { order, cap } => ConfigError::cap("group order", order, cap),
            Error::CapExceeded {
                what,
                requested,
                cap,
            } => ConfigError::cap(&what, requested, cap),
            other => ConfigError::new(ErrorCode::Spec, other.to_string()),
        }
    }
}

/// Values set on the command line; they override the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub task: Option<String>,
    pub mode: Option<Mode>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug)]
enum Built {
    Finite {
        spec: FiniteSpec,
        module: Option<BanachModule>,
    },
    Fp {
        pres: crate::fp::FpPresentation,
        module: Option<FpModule>,
    },
}

/// A validated task description with defaults filled in.
#[derive(Clone, Debug)]
pub struct TaskConfig {
    pub task: Task,
    pub mode: Mode,
    pub seed: Option<u64>,
    pub degrees: Vec<usize>,
    pub epsilon: f64,
    pub samples: Option<usize>,
    pub budget: Budget,
    pub order_cap: usize,
    /// The canonical document the content hash is taken over.
    pub canonical: Value,
    built: Built,
}

const KEYS: [&str; 14] = [
    "task",
    "mode",
    "seed",
    "group",
    "rep",
    "subgroup",
    "xi",
    "cocycle",
    "degrees",
    "epsilon",
    "samples",
    "budget",
    "order_cap",
    "expect",
];

pub fn parse_config(text: &str) -> Result<TaskConfig, ConfigError> {
    parse_config_with(text, &Overrides::default())
}

/// Reads a JSON document, falling back to TOML.
pub fn parse_document(text: &str) -> Result<Value, ConfigError> {
    match serde_json::from_str::<Value>(text) {
        Ok(v) => Ok(v),
        Err(je) => toml::from_str::<Value>(text).map_err(|te| {
            ConfigError::new(
                ErrorCode::Parse,
                format!("neither JSON ({je}) nor TOML ({te})"),
            )
        }),
    }
}

pub fn parse_config_with(text: &str, ov: &Overrides) -> Result<TaskConfig, ConfigError> {
    config_from_value(parse_document(text)?, ov)
}

fn spec_error(msg: impl Into<String>) -> ConfigError {
    ConfigError::new(ErrorCode::Spec, msg)
}

pub fn config_from_value(v: Value, ov: &Overrides) -> Result<TaskConfig, ConfigError> {
    let obj = v
        .as_object()
        .ok_or_else(|| spec_error("config must be a table"))?;
    if let Some(k) = obj.keys().find(|k| !KEYS.contains(&k.as_str())) {
        return Err(spec_error(format!("unknown key '{k}'")));
    }
    let file_task = match obj.get("task") {
        None => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(ConfigError::new(ErrorCode::Task, "task must be a string")),
    };
    let task_name = match (&ov.task, &file_task) {
        (Some(a), Some(b)) if a != b => {
            return Err(ConfigError::new(
                ErrorCode::Task,
                format!("command asks for '{a}' but the config names '{b}'"),
            ))
        }
        (Some(a), _) => a.clone(),
        (None, Some(b)) => b.clone(),
        (None, None) => return Err(ConfigError::new(ErrorCode::Task, "no task given")),
    };
    let task = Task::from_name(&task_name)
        .ok_or_else(|| ConfigError::new(ErrorCode::Task, format!("unknown task '{task_name}'")))?;

    let mode = match (ov.mode, obj.get("mode")) {
        (Some(m), _) => m,
        (None, None) => Mode::Exact,
        (None, Some(m)) => serde_json::from_value(m.clone())
            .map_err(|_| spec_error("mode must be exact or float"))?,
    };
    let seed = match (ov.seed, obj.get("seed")) {
        (Some(s), _) => Some(s),
        (None, None) => None,
        (None, Some(s)) => Some(
            s.as_u64()
                .ok_or_else(|| spec_error("seed must be a nonnegative integer"))?,
        ),
    };
    let degrees = match obj.get("degrees") {
        None => task.default_degrees(),
        Some(Value::Number(n)) => vec![n
            .as_u64()
            .ok_or_else(|| spec_error("degrees must be integers"))?
            as usize],
        Some(Value::Array(a)) => a
            .iter()
            .map(|x| {
                x.as_u64()
                    .map(|d| d as usize)
                    .ok_or_else(|| spec_error("degrees must be integers"))
            })
            .collect::<Result<_, _>>()?,
        Some(_) => return Err(spec_error("degrees must be an array of integers")),
    };
    if degrees.is_empty() {
        return Err(spec_error("degrees must not be empty"));
    }
    if let Some(&d) = degrees.iter().find(|&&d| d > DEFAULT_DEGREE_CAP) {
        return Err(ConfigError::cap("degree", d, DEFAULT_DEGREE_CAP));
    }
    let epsilon = match obj.get("epsilon") {
        None => 1e-6,
        Some(e) => e
            .as_f64()
            .ok_or_else(|| spec_error("epsilon must be a number"))?,
    };
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(spec_error("epsilon must be positive"));
    }
    let samples = match obj.get("samples") {
        None => None,
        Some(s) => Some(
            s.as_u64()
                .ok_or_else(|| spec_error("samples must be a nonnegative integer"))?
                as usize,
        ),
    };
    if let Some(s) = samples {
        if s > SAMPLE_CAP {
            return Err(ConfigError::cap("samples", s, SAMPLE_CAP));
        }
    }
    let budget: Budget = match obj.get("budget") {
        None => Budget::default(),
        Some(b) => {
            serde_json::from_value(b.clone()).map_err(|e| spec_error(format!("bad budget: {e}")))?
        }
    };
    let order_cap = match obj.get("order_cap") {
        None => DEFAULT_ORDER_CAP,
        Some(c) => c
            .as_u64()
            .ok_or_else(|| spec_error("order_cap must be an integer"))? as usize,
    };
    if task.randomized() && seed.is_none() {
        return Err(ConfigError::new(
            ErrorCode::Seed,
            format!("task '{task}' is randomized and needs a seed"),
        ));
    }

    let group_v = obj
        .get("group")
        .ok_or_else(|| spec_error("missing group spec"))?;
    let rep_v = obj.get("rep");
    if task.needs_rep() && rep_v.is_none() {
        return Err(spec_error(format!("task '{task}' needs a rep spec")));
    }
    let built = match spec::parse_group(group_v, order_cap)? {
        GroupSpec::Finite(spec) => {
            if task == Task::FpH1 {
                return Err(spec_error("fp-h1 needs a presented group (type fp)"));
            }
            let module = rep_v.map(|r| spec::parse_module(r, &spec)).transpose()?;
            Built::Finite { spec, module }
        }
        GroupSpec::Fp(pres) => {
            if !matches!(task, Task::FpH1 | Task::AffineFixed | Task::AppendixSuite) {
                return Err(spec_error(format!("task '{task}' needs a finite group")));
            }
            let module = rep_v.map(|r| spec::parse_fp_module(r, &pres)).transpose()?;
            Built::Fp { pres, module }
        }
    };

    let mut canonical = obj.clone();
    canonical.insert("task".into(), json!(task.name()));
    canonical.insert(
        "mode".into(),
        serde_json::to_value(mode).expect("mode serializes"),
    );
    canonical.insert("seed".into(), seed.map_or(Value::Null, |s| json!(s)));
    canonical.insert("degrees".into(), json!(degrees));
    canonical.insert("epsilon".into(), json!(epsilon));
    canonical.insert(
        "budget".into(),
        serde_json::to_value(budget).expect("budget serializes"),
    );
    canonical.insert("order_cap".into(), json!(order_cap));
    Ok(TaskConfig {
        task,
        mode,
        seed,
        degrees,
        epsilon,
        samples,
        budget,
        order_cap,
        canonical: Value::Object(canonical),
        built,
    })
}

impl TaskConfig {
    /// SHA-256 of the canonical config (sorted keys, defaults filled).
    pub fn content_hash(&self) -> String {
        let text = serde_json::to_string(&self.canonical).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.canonical.get(key)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    BudgetExhausted,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::BudgetExhausted => "budget-exhausted",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::BudgetExhausted => 3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub task: Task,
    pub input_hash: String,
    pub seed: Option<u64>,
    pub mode: Mode,
    pub status: Status,
    pub results: Value,
    /// First failing witness, present on failure.
    pub witness: Option<Value>,
    pub best_bound: Option<f64>,
    /// Wall time; not part of the rendered report.
    pub timing: Duration,
}

impl Report {
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("task".into(), json!(self.task.name()));
        m.insert("input_hash".into(), json!(self.input_hash));
        m.insert("seed".into(), self.seed.map_or(Value::Null, |s| json!(s)));
        m.insert(
            "mode".into(),
            serde_json::to_value(self.mode).expect("mode serializes"),
        );
        m.insert("status".into(), json!(self.status.as_str()));
        m.insert("results".into(), self.results.clone());
        if let Some(w) = &self.witness {
            m.insert("witness".into(), w.clone());
        }
        if let Some(b) = self.best_bound {
            m.insert("best_bound".into(), num(b));
        }
        Value::Object(m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Table,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "table" => Ok(Format::Table),
            _ => Err(format!("unknown format '{s}'")),
        }
    }
}

pub fn emit_report(r: &Report, format: Format) -> String {
    let v = r.to_json();
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&v).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Table => {
            let mut rows = Vec::new();
            flatten("", &v, &mut rows);
            let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            rows.iter()
                .map(|(k, val)| format!("{k:<width$}  {val}\n"))
                .collect()
        }
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) if !m.is_empty() => {
            for (k, x) in m {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, x, out);
            }
        }
        Value::Array(a) if a.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

/// Finite floats as JSON numbers, the rest as strings.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

fn qs(x: &Q) -> Value {
    json!(fmt_q(x))
}

fn qv(v: &[Q]) -> Value {
    Value::Array(v.iter().map(qs).collect())
}

struct Outcome {
    status: Status,
    results: Value,
    witness: Option<Value>,
    best_bound: Option<f64>,
}

impl Outcome {
    fn judge(ok: bool, results: Value, witness: impl FnOnce() -> Value) -> Outcome {
        Outcome {
            status: if ok { Status::Pass } else { Status::Fail },
            witness: if ok { None } else { Some(witness()) },
            results,
            best_bound: None,
        }
    }
}

/// Runs the configured task. Cap violations found while computing are config
/// errors; other errors become failing reports carrying the message.
pub fn run_task(cfg: &TaskConfig) -> Result<Report, ConfigError> {
    let start = Instant::now();
    let outcome = match dispatch(cfg) {
        Ok(o) => o,
        Err(e @ (Error::GroupTooLarge { .. } | Error::CapExceeded { .. })) => return Err(e.into()),
        Err(Error::BudgetExhausted { steps, best_bound }) => Outcome {
            status: Status::BudgetExhausted,
            results: json!({ "steps": steps }),
            witness: None,
            best_bound: Some(best_bound),
        },
        Err(e) => Outcome {
            status: Status::Fail,
            results: json!({ "error": e.to_string() }),
            witness: Some(json!({ "error": e.to_string() })),
            best_bound: None,
        },
    };
    Ok(Report {
        task: cfg.task,
        input_hash: cfg.content_hash(),
        seed: cfg.seed,
        mode: cfg.mode,
        status: outcome.status,
        results: outcome.results,
        witness: outcome.witness,
        best_bound: outcome.best_bound,
        timing: start.elapsed(),
    })
}

type R<T> = crate::error::Result<T>;

fn dispatch(cfg: &TaskConfig) -> R<Outcome> {
    match &cfg.built {
        Built::Fp { pres, module } => {
            let m = module
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument("missing rep".into()))?;
            match cfg.task {
                Task::FpH1 => fp_h1(cfg, m),
                Task::AffineFixed => fp_affine_fixed(cfg, m),
                Task::AppendixSuite => fp_appendix(m),
                _ => Err(Error::InvalidArgument(format!(
                    "task '{}' needs a finite group: {pres:?}",
                    cfg.task
                ))),
            }
        }
        Built::Finite { spec, module } => {
            let group = &spec.group;
            let f = subgroup(cfg, group)?;
            let need = || {
                module
                    .as_ref()
                    .ok_or_else(|| Error::InvalidArgument("missing rep".into()))
            };
            match cfg.task {
                Task::GroupInfo => group_info(spec),
                Task::FcData => fc_task(&f),
                Task::Commutant => commutant_task(&f, module.as_ref()),
                Task::Cohomology => cohomology_task(cfg, need()?),
                Task::SplitCheck => split_task(cfg, need()?),
                Task::HomotopyCheck => homotopy_task(cfg, need()?, &f),
                Task::RestrictionCheck => restriction_task(cfg, need()?, &f),
                Task::AffineFixed => affine_task(cfg, need()?),
                Task::ApproximationSuite => approximation_task(cfg, spec, need()?, &f),
                Task::AppendixSuite => appendix_task(cfg, need()?),
                Task::FpH1 => unreachable!("rejected during validation"),
            }
        }
    }
}

fn subgroup(cfg: &TaskConfig, group: &GroupRef) -> R<Subgroup> {
    let gens = match cfg.get("subgroup") {
        None => return Ok(Subgroup::whole(group)),
        Some(Value::Array(a)) => a,
        Some(v) => v
            .get("generators")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("subgroup must list generators".into()))?,
    };
    let gens: Vec<usize> = gens
        .iter()
        .map(|x| {
            x.as_u64()
                .map(|g| g as usize)
                .filter(|&g| g < group.order())
                .ok_or_else(|| Error::Parse(format!("bad subgroup generator {x}")))
        })
        .collect::<R<_>>()?;
    subgroup_closure(group, &gens)
}

fn rng(cfg: &TaskConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0))
}

fn caps() -> Caps {
    Caps {
        degree: DEFAULT_DEGREE_CAP,
        flat: DEFAULT_FLAT_CAP,
    }
}

fn group_info(spec: &FiniteSpec) -> R<Outcome> {
    let g = &spec.group;
    let whole = Subgroup::whole(g);
    let cd = f_conjugacy_classes(&whole);
    let center = g
        .elements()
        .filter(|&x| g.elements().all(|y| g.mul(x, y) == g.mul(y, x)))
        .count();
    let mut results = json!({
        "order": g.order(),
        "identity": g.identity(),
        "abelian": g.is_abelian(),
        "generators": spec.generators,
        "element_orders": g.elements().map(|x| g.element_order(x)).collect::<Vec<_>>(),
        "inverses": g.elements().map(|x| g.inv(x)).collect::<Vec<_>>(),
        "class_sizes": cd.sizes(),
        "center_order": center,
    });
    if let Some(p) = g.permutations() {
        results["permutations"] = json!(p);
    }
    let ok = cd.sizes().iter().sum::<usize>() == g.order() && g.order().is_multiple_of(center);
    Ok(Outcome::judge(
        ok,
        results,
        || json!({ "class_sizes": cd.sizes() }),
    ))
}

fn fc_task(f: &Subgroup) -> R<Outcome> {
    let g = f.group();
    let fc = fc_data(f)?;
    let cd = f_conjugacy_classes(f);
    let bad = g.elements().find(|&x| {
        let centralizer = f
            .elements()
            .iter()
            .filter(|&&y| g.mul(x, y) == g.mul(y, x))
            .count();
        let class = cd.classes()[cd.class_of(x)].len();
        fc.centralizer_indices[x] * centralizer != f.order() || class != fc.centralizer_indices[x]
    });
    let results = json!({
        "subgroup_order": f.order(),
        "subgroup_generators": f.generators(),
        "fc_order": fc.fc_subgroup.order(),
        "class_count": cd.classes().len(),
        "class_sizes": cd.sizes(),
        "centralizer_indices": fc.centralizer_indices,
        "orbit_stabilizer": bad.is_none(),
    });
    let ok = bad.is_none() && fc.fc_subgroup.order() == g.order();
    Ok(Outcome::judge(ok, results, || json!({ "element": bad })))
}

fn coeffs(xi: &GroupAlgebraElement) -> Vec<Q> {
    xi.group().elements().map(|g| xi.coeff(g)).collect()
}

fn commutant_task(f: &Subgroup, module: Option<&BanachModule>) -> R<Outcome> {
    let g = f.group();
    let cb = commutant_basis(f)?;
    let cd = f_conjugacy_classes(f);
    let sums: Vec<Vec<Q>> = (0..cd.classes().len())
        .map(|i| class_sum(&cd, i).map(|s| coeffs(&s)))
        .collect::<R<_>>()?;
    let sums_commute = (0..cd.classes().len())
        .all(|i| class_sum(&cd, i).is_ok_and(|s| f.elements().iter().all(|&x| s.commutes_with(x))));
    let basis: Vec<Vec<Q>> = cb.basis.iter().map(coeffs).collect();
    let basis_in_sums = basis.iter().all(|b| exact::in_span(&sums, b));
    let n = cd.classes().len();
    let mut results = json!({
        "subgroup_order": f.order(),
        "class_count": n,
        "kernel_dim": cb.kernel_dim,
        "basis_dim": basis.len(),
        "sums_commute": sums_commute,
        "basis_in_class_span": basis_in_sums,
    });
    let mut ok = cb.kernel_dim == n && basis.len() == n && sums_commute && basis_in_sums;
    if let Some(m) = module {
        let d = m.dim();
        let mut rows = Vec::new();
        for avg in &cb.averages {
            let t = QMatrix::identity(d).sub(&m.apply_algebra(avg)?);
            rows.extend(t.row_vecs());
        }
        let fixed = if rows.is_empty() {
            QMatrix::identity(d).row_vecs()
        } else {
            exact::kernel(&QMatrix::from_rows(rows))
        };
        let inv = m.invariants(&Subgroup::whole(g));
        let equal = exact::same_span(&fixed, &inv, d);
        let strict = m.p().is_uniformly_convex();
        results["p"] = json!(m.p().to_string());
        results["average_fixed_dim"] = json!(fixed.len());
        results["invariant_dim"] = json!(inv.len());
        results["average_fixed_equals_invariants"] = json!(equal);
        results["strictly_convex"] = json!(strict);
        if strict {
            ok &= equal;
        }
    }
    Ok(Outcome::judge(ok, results.clone(), || results))
}

fn cohomology_task(cfg: &TaskConfig, m: &BanachModule) -> R<Outcome> {
    let cx = CochainComplex::with_caps(m, &Subgroup::whole(m.group()), caps())?;
    let mut rows = Vec::new();
    for &n in &cfg.degrees {
        let r = cx.cohomology(n, cfg.mode, false)?;
        rows.push(json!({
            "degree": n,
            "dim_c": r.dim_c,
            "dim_z": r.dim_z,
            "dim_b": r.dim_b,
            "dim_h": r.dim_h,
            "method": serde_json::to_value(r.method).expect("method serializes"),
        }));
    }
    let bad = rows
        .iter()
        .find(|r| r["dim_b"].as_u64() > r["dim_z"].as_u64())
        .cloned();
    let results = json!({ "module_dim": m.dim(), "p": m.p().to_string(), "degrees": rows });
    Ok(Outcome::judge(bad.is_none(), results, || bad.unwrap()))
}

fn xi_or(
    cfg: &TaskConfig,
    group: &GroupRef,
    default: impl FnOnce() -> R<GroupAlgebraElement>,
) -> R<GroupAlgebraElement> {
    match cfg.get("xi") {
        Some(v) => GroupAlgebraElement::from_json(group, v),
        None => default(),
    }
}

fn uniform(group: &GroupRef) -> R<GroupAlgebraElement> {
    uniform_average(group, &group.elements().collect::<Vec<_>>())
}

fn split_task(cfg: &TaskConfig, m: &BanachModule) -> R<Outcome> {
    let group = m.group();
    let xi = xi_or(cfg, group, || uniform(group))?;
    let max = *cfg.degrees.iter().max().expect("degrees nonempty");
    let ch = contracting_homotopy(m, &xi, max)?;
    let cx = CochainComplex::with_caps(m, &Subgroup::whole(group), caps())?;
    let mut rows = Vec::new();
    let mut first_bad = None;
    for n in 0..=max {
        let h = cx.cohomology(n, Mode::Exact, false)?;
        let holds = ch.identity_holds[n];
        if (!holds || h.dim_h != 0) && first_bad.is_none() {
            first_bad = Some(json!({ "degree": n, "identity_holds": holds, "dim_h": h.dim_h }));
        }
        rows.push(json!({
            "degree": n,
            "identity_holds": holds,
            "residual": if holds { "0" } else { "nonzero" },
            "dim_h": h.dim_h,
        }));
    }
    let nowak = nowak_projection(m, &xi)?;
    let results = json!({
        "xi": xi.to_json(),
        "degrees": rows,
        "projection": {
            "dim_c": nowak.dim_c,
            "dim_b": nowak.dim_b,
            "dim_ker_r": nowak.dim_ker_r,
            "idempotent": nowak.idempotent,
            "image_is_b": nowak.image_is_b,
            "kernel_is_ker_r": nowak.kernel_is_ker_r,
            "idempotency_residual": nowak.idempotency_residual,
        },
    });
    if first_bad.is_none() && !nowak.passed() {
        first_bad = Some(results["projection"].clone());
    }
    Ok(Outcome::judge(first_bad.is_none(), results, || {
        first_bad.unwrap()
    }))
}

/// Average of the largest `F`-class (lowest index on ties).
fn largest_class_average(f: &Subgroup) -> R<GroupAlgebraElement> {
    let cd = f_conjugacy_classes(f);
    let sizes = cd.sizes();
    let best = (0..sizes.len())
        .max_by_key(|&i| (sizes[i], std::cmp::Reverse(i)))
        .expect("some class");
    class_average(&cd, best)
}

fn homotopy_task(cfg: &TaskConfig, m: &BanachModule, f: &Subgroup) -> R<Outcome> {
    let xi = xi_or(cfg, m.group(), || largest_class_average(f))?;
    let samples = cfg.samples.unwrap_or(20);
    let res = verify_homotopy_identity(m, &xi, f, &cfg.degrees, samples, &mut rng(cfg))?;
    let rows: Vec<Value> = res
        .iter()
        .map(|r| {
            json!({
                "degree": r.degree,
                "samples": r.samples,
                "residual": if r.zero_residual { "0" } else { "nonzero" },
            })
        })
        .collect();
    let bad = res.iter().find(|r| !r.zero_residual);
    let results = json!({ "xi": xi.to_json(), "subgroup_order": f.order(), "degrees": rows });
    Ok(Outcome::judge(bad.is_none(), results, || {
        let r = bad.unwrap();
        json!({ "degree": r.degree, "tuple": r.first_failure })
    }))
}

fn random_combination(basis: &[Vec<Q>], len: usize, rng: &mut ChaCha8Rng) -> Vec<Q> {
    let coeffs = random_vector(rng, basis.len(), 5, 1);
    let mut out = vec![q(0); len];
    for (c, b) in coeffs.iter().zip(basis) {
        for (o, x) in out.iter_mut().zip(b) {
            *o += c * x;
        }
    }
    out
}

fn restriction_task(cfg: &TaskConfig, m: &BanachModule, f: &Subgroup) -> R<Outcome> {
    let group = m.group();
    let xi = xi_or(cfg, group, || uniform(group))?;
    let cx = CochainComplex::with_caps(m, &Subgroup::whole(group), caps())?;
    let f_cx = CochainComplex::with_caps(m, f, caps())?;
    let samples = cfg.samples.unwrap_or(100);
    let mut rng = rng(cfg);
    let mut rows = Vec::new();
    let mut bad: Option<Value> = None;
    for &n in &cfg.degrees {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "restriction-check needs degrees >= 1".into(),
            ));
        }
        let h = cx.cohomology(n, Mode::Exact, true)?;
        let basis = h.basis_z.unwrap_or_default();
        let len = cx.flat_len(n)?;
        let mut check = |phi: &Cochain, label: Value| -> R<bool> {
            let psi = restriction_nullifier(m, phi, f, &xi)?;
            let restricted = cx.restrict(phi, &f_cx)?;
            let ok = f_cx.coboundary(&psi)? == restricted && f_cx.is_coboundary(&restricted)?;
            if !ok && bad.is_none() {
                bad = Some(json!({ "degree": n, "cocycle": label }));
            }
            Ok(ok)
        };
        let mut basis_ok = 0;
        for (i, b) in basis.iter().enumerate() {
            basis_ok += check(&cx.cochain(n, b.clone())?, json!(format!("basis[{i}]")))? as usize;
        }
        let mut random_ok = 0;
        let random = if basis.is_empty() { 0 } else { samples };
        for i in 0..random {
            let v = random_combination(&basis, len, &mut rng);
            random_ok += check(&cx.cochain(n, v)?, json!(format!("random[{i}]")))? as usize;
        }
        rows.push(json!({
            "degree": n,
            "dim_z": basis.len(),
            "basis_restricts_to_coboundaries": basis_ok,
            "random_cocycles": random,
            "random_restrict_to_coboundaries": random_ok,
        }));
    }
    let results = json!({ "xi": xi.to_json(), "subgroup_order": f.order(), "degrees": rows });
    Ok(Outcome::judge(bad.is_none(), results, || bad.unwrap()))
}

fn cocycle_or_random(cfg: &TaskConfig, cx: &CochainComplex, rng: &mut ChaCha8Rng) -> R<Cochain> {
    if let Some(v) = cfg.get("cocycle") {
        return cx.cochain_from_json(v);
    }
    let h = cx.cohomology(1, Mode::Exact, true)?;
    let basis = h.basis_z.unwrap_or_default();
    let v = random_combination(&basis, cx.flat_len(1)?, rng);
    cx.cochain(1, v)
}

fn affine_task(cfg: &TaskConfig, m: &BanachModule) -> R<Outcome> {
    let group = m.group();
    let cx = CochainComplex::over_group(m);
    let mut rng = rng(cfg);
    let phi = cocycle_or_random(cfg, &cx, &mut rng)?;
    if phi.degree() != 1 {
        return Err(Error::InvalidArgument(
            "affine actions need a degree-1 cocycle".into(),
        ));
    }
    let alpha = action_from_cocycle(m, &phi)?;
    let fixed = fixed_points(&alpha)?;
    let coboundary = cx.is_coboundary(&phi)?;
    let trials = cfg.samples.unwrap_or(100);
    let origin = vec![q(0); m.dim()];
    let hull = delta_orbit_hull_check(&alpha, &origin, trials, &mut rng)?;
    let all: Vec<usize> = group.elements().collect();
    let almost = almost_fixed_point(&alpha, &all, cfg.epsilon, cfg.seed.unwrap_or(0))?;
    let consistent =
        fixed.fixed.is_some() == coboundary && (fixed.fixed.is_none() || fixed.barycenter_fixed);
    let results = json!({
        "cocycle": phi.to_json(),
        "fixed_set": fixed.fixed.as_ref().map(|s| json!({
            "point": qv(&s.point),
            "directions": s.directions.iter().map(|d| qv(d)).collect::<Vec<_>>(),
        })),
        "barycenter": qv(&fixed.barycenter),
        "barycenter_fixed": fixed.barycenter_fixed,
        "is_coboundary": coboundary,
        "hull_trials": hull.trials,
        "hull_passed": hull.passed,
        "displacement": displacement_json(&almost),
    });
    let ok = consistent && hull.passed;
    Ok(Outcome::judge(
        ok,
        results,
        || json!({ "hull_failure": hull.first_failure, "fixed_matches_coboundary": consistent }),
    ))
}

fn displacement_json(a: &crate::affine::AlmostFixedReport) -> Value {
    json!({
        "value": num(a.value),
        "point": a.point.iter().map(|&x| num(x)).collect::<Vec<_>>(),
        "below_eps": a.below_eps,
        "exact_fixed": a.exact_fixed,
        "restarts": a.restarts,
        "seed": a.seed,
    })
}

fn fp_values(cfg: &TaskConfig, m: &FpModule) -> R<Vec<Vec<Q>>> {
    let pres = m.presentation();
    let v = cfg
        .get("cocycle")
        .ok_or_else(|| Error::Parse("affine-fixed on a presented group needs a cocycle".into()))?;
    let values: Vec<Vec<Q>> = match v {
        Value::Array(a) => a.iter().map(spec::vector).collect::<R<_>>()?,
        Value::Object(o) => {
            let mut out = vec![None; pres.rank()];
            for (k, x) in o {
                let i = pres
                    .generators()
                    .iter()
                    .position(|c| c.to_string() == *k)
                    .ok_or_else(|| Error::Parse(format!("unknown generator '{k}'")))?;
                out[i] = Some(spec::vector(x)?);
            }
            out.into_iter()
                .enumerate()
                .map(|(i, x)| {
                    x.ok_or_else(|| {
                        Error::Parse(format!("no value for '{}'", pres.generators()[i]))
                    })
                })
                .collect::<R<_>>()?
        }
        _ => {
            return Err(Error::Parse(
                "cocycle must list one vector per generator".into(),
            ))
        }
    };
    if values.len() != pres.rank() || values.iter().any(|x| x.len() != m.dim()) {
        return Err(Error::Parse(
            "cocycle must give one vector of the module dimension per generator".into(),
        ));
    }
    Ok(values)
}

fn fp_affine_fixed(cfg: &TaskConfig, m: &FpModule) -> R<Outcome> {
    let values = fp_values(cfg, m)?;
    if !m.is_cocycle(&values)? {
        return Err(Error::NotCocycle(
            "generator values violate a relator".into(),
        ));
    }
    let fixed = fp_fixed_points(m, &values)?;
    let space = fp_cocycle_space(m);
    let flat: Vec<Q> = values.concat();
    let coboundary = exact::in_span(&space.b_basis, &flat);
    let almost = fp_almost_fixed_point(m, &values, cfg.epsilon, cfg.seed.unwrap_or(0))?;
    let fixed_ok = match &fixed {
        Some(s) => {
            let pres = m.presentation();
            (0..pres.rank()).all(|i| {
                let moved = m.generator_matrix(i).mul_vec(&s.point);
                moved
                    .iter()
                    .zip(&values[i])
                    .map(|(a, b)| a + b)
                    .collect::<Vec<_>>()
                    == s.point
            })
        }
        None => true,
    };
    let consistent = fixed.is_some() == coboundary && fixed_ok;
    let results = json!({
        "fixed_set": fixed.as_ref().map(|s| json!({
            "point": qv(&s.point),
            "directions": s.directions.iter().map(|d| qv(d)).collect::<Vec<_>>(),
        })),
        "unique": fixed.as_ref().is_some_and(|s| s.directions.is_empty()),
        "is_coboundary": coboundary,
        "displacement": displacement_json(&almost),
    });
    Ok(Outcome::judge(
        consistent,
        results,
        || json!({ "fixed_matches_coboundary": false }),
    ))
}

fn fp_h1(cfg: &TaskConfig, m: &FpModule) -> R<Outcome> {
    let space = fp_cocycle_space(m);
    let ab = abelianization(m.presentation());
    let hf = homomorphism_free_check(m)?;
    let inv = m.invariants().len();
    let mut results = json!({
        "rank": m.presentation().rank(),
        "relators": m.presentation().relators().len(),
        "module_dim": m.dim(),
        "invariant_dim": inv,
        "dim_z": space.dim_z,
        "dim_b": space.dim_b,
        "dim_h": space.dim_h,
        "abelianization": { "free_rank": ab.free_rank, "torsion": torsion_u64(&ab) },
        "homomorphism_free": hf.homomorphism_free,
        "quotient_map_injective": hf.injective,
    });
    let mut bad = None;
    if space.dim_b + inv != m.dim() || space.dim_z != space.dim_b + space.dim_h {
        bad = Some(json!({ "dims_inconsistent": true }));
    }
    if let Some(expect) = cfg.get("expect").and_then(Value::as_object) {
        for (k, want) in expect {
            if results.get(k) != Some(want) && bad.is_none() {
                bad = Some(json!({ "field": k, "expected": want, "found": results.get(k) }));
            }
        }
        results["expect_checked"] = json!(expect.len());
    }
    Ok(Outcome::judge(bad.is_none(), results, || bad.unwrap()))
}

fn fp_appendix(m: &FpModule) -> R<Outcome> {
    let hf = homomorphism_free_check(m)?;
    let space = fp_cocycle_space(m);
    let ok = !hf.homomorphism_free || hf.injective;
    let results = json!({
        "homomorphism_free": hf.homomorphism_free,
        "trivial_h1": hf.trivial_h1,
        "kernel_dim": hf.kernel_dim,
        "quotient_map_injective": hf.injective,
        "dim_h": space.dim_h,
    });
    Ok(Outcome::judge(
        ok,
        results,
        || json!({ "kernel_dim": hf.kernel_dim }),
    ))
}

fn approximation_task(
    cfg: &TaskConfig,
    spec: &FiniteSpec,
    m: &BanachModule,
    f: &Subgroup,
) -> R<Outcome> {
    let group = m.group();
    let eps = cfg.epsilon;
    let mut rng = rng(cfg);
    let mut best: f64 = 0.0;
    let mut exhausted = false;
    let note = |e: Error, best: &mut f64, exhausted: &mut bool| -> R<Value> {
        match e {
            Error::BudgetExhausted { steps, best_bound } => {
                *best = best.max(best_bound);
                *exhausted = true;
                Ok(
                    json!({ "budget_exhausted": true, "steps": steps, "best_bound": num(best_bound) }),
                )
            }
            other => Err(other),
        }
    };

    let whole = Subgroup::whole(group);
    let cd = f_conjugacy_classes(&whole);
    let gens: Vec<GroupAlgebraElement> = (0..cd.classes().len())
        .filter(|&i| cd.classes()[i] != [group.identity()])
        .map(|i| class_average(&cd, i))
        .collect::<R<_>>()?;
    let count = cfg.samples.unwrap_or(3);
    let targets: Vec<Vec<Q>> = (0..count)
        .map(|_| random_vector(&mut rng, m.dim(), 10, 7))
        .filter(|v| is_nonzero(v))
        .collect();
    let mut ok = true;
    let shrink = match shrinking_average(m, &gens, None, &targets, eps, &cfg.budget) {
        Ok(s) => {
            best = best.max(s.max_norm);
            ok &= s.max_norm < eps;
            json!({
                "targets": targets.len(),
                "max_norm": num(s.max_norm),
                "steps": s.steps,
                "certified_exact": s.certified_exact,
                "support": s.xi.support().len(),
                "strict_convexity_warning": s.strict_convexity_warning,
            })
        }
        Err(e) => note(e, &mut best, &mut exhausted)?,
    };

    let cx = CochainComplex::over_group(m);
    let phi = cocycle_or_random(cfg, &cx, &mut rng)?;
    let tuples: Vec<Vec<usize>> = f.elements().iter().map(|&x| vec![x]).collect();
    let witness = match almost_coboundary_witness(m, &phi, f, &tuples, eps, &cfg.budget) {
        Ok(w) => {
            best = best.max(w.sup_bound);
            ok &= w.sup_bound < eps && w.in_coboundaries;
            json!({
                "sup_bound": num(w.sup_bound),
                "certified_exact": w.certified_exact,
                "in_coboundaries": w.in_coboundaries,
                "steps": w.steps,
            })
        }
        Err(e) => note(e, &mut best, &mut exhausted)?,
    };

    let decay = match generator_average_decay(m, &phi, &spec.generators, eps, &cfg.budget) {
        Ok(d) => {
            best = best.max(d.bound);
            ok &= d.bound < eps && d.identity_holds;
            json!({
                "bound": num(d.bound),
                "certified_exact": d.certified_exact,
                "identity_holds": d.identity_holds,
                "steps": d.steps,
                "generators": spec.generators,
            })
        }
        Err(e) => note(e, &mut best, &mut exhausted)?,
    };
    let results = json!({
        "epsilon": num(eps),
        "p": m.p().to_string(),
        "shrinking_average": shrink,
        "coboundary_witness": witness,
        "generator_decay": decay,
    });
    if exhausted {
        return Ok(Outcome {
            status: Status::BudgetExhausted,
            results,
            witness: None,
            best_bound: Some(best),
        });
    }
    let mut out = Outcome::judge(ok, results.clone(), || results);
    out.best_bound = if ok { None } else { Some(best) };
    Ok(out)
}

fn appendix_task(cfg: &TaskConfig, m: &BanachModule) -> R<Outcome> {
    let samples = cfg.samples.unwrap_or(1000);
    let qd = quotient_displacement_check(m, samples, &mut rng(cfg))?;
    let gc = guichardet_criterion(m, cfg.seed.unwrap_or(0))?;
    let results = json!({
        "quotient_displacement": {
            "samples": qd.samples,
            "violations": qd.violations,
            "cocycle_samples": qd.cocycle_samples,
            "cocycle_violations": qd.cocycle_violations,
            "exact": qd.exact,
            "quotient_dim": qd.quotient_dim,
        },
        "guichardet": {
            "invariant_dim": gc.invariant_dim,
            "quotient_dim": gc.quotient_dim,
            "dim_b1": gc.dim_b1,
            "b1_closed": gc.b1_closed,
            "quotient_invariant_dim": gc.quotient_invariant_dim,
            "averaging_bound": num(gc.averaging_bound),
            "averaging_bound_exact": gc.averaging_bound_exact,
            "no_almost_invariant": gc.no_almost_invariant,
            "coboundary_dims_match": gc.coboundary_dims_match,
        },
    });
    let ok = qd.passed() && gc.passed();
    Ok(Outcome::judge(ok, results, || {
        json!({
            "displacement": qd.first_violation.as_ref().map(|v| json!({ "x": v.x, "g": v.g, "cocycle_form": v.cocycle_form })),
            "guichardet_passed": gc.passed(),
        })
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> TaskConfig {
        parse_config(text).unwrap()
    }

    #[test]
    fn minimal_cohomology_config() {
        let c = cfg(
            r#"{"task":"cohomology","group":{"type":"cyclic","n":2},"rep":{"kind":"regular"}}"#,
        );
        assert_eq!(c.task, Task::Cohomology);
        assert_eq!(c.degrees, vec![0, 1, 2]);
        assert_eq!(c.epsilon, 1e-6);
        assert_eq!(c.mode, Mode::Exact);
    }

    #[test]
    fn error_codes() {
        let e =
            parse_config(r#"{"task":"frobnicate","group":{"type":"cyclic","n":2}}"#).unwrap_err();
        assert_eq!(e.code, ErrorCode::Task);
        let e = parse_config(r#"{"task":"cohomology","degrees":[7],"group":{"type":"cyclic","n":2},"rep":{"kind":"regular"}}"#)
            .unwrap_err();
        assert_eq!((e.code, e.cap), (ErrorCode::Cap, Some(3)));
        assert!(e.message.contains('3'));
        let e = parse_config(
            r#"{"task":"homotopy-check","group":{"type":"cyclic","n":2},"rep":{"kind":"regular"}}"#,
        )
        .unwrap_err();
        assert_eq!(e.code, ErrorCode::Seed);
        assert_eq!(
            parse_config("{not json").unwrap_err().code,
            ErrorCode::Parse
        );
        let e = parse_config(
            r#"{"task":"cohomology","group":{"type":"cyclic","n":2},"rep":{"kind":"nope"}}"#,
        )
        .unwrap_err();
        assert_eq!(e.code, ErrorCode::Spec);
    }

    #[test]
    fn toml_config() {
        let c = cfg("task = \"group-info\"\n[group]\ntype = \"cyclic\"\nn = 5\n");
        let r = run_task(&c).unwrap();
        assert_eq!(r.status, Status::Pass);
        assert_eq!(r.results["order"], json!(5));
    }

    #[test]
    fn hash_ignores_key_order_but_not_content() {
        let a = cfg(r#"{"task":"group-info","group":{"type":"cyclic","n":3}}"#);
        let b = cfg(r#"{"group":{"n":3,"type":"cyclic"},"task":"group-info"}"#);
        let c = cfg(r#"{"task":"group-info","group":{"type":"cyclic","n":4}}"#);
        assert_eq!(a.content_hash(), b.content_hash());
        assert_ne!(a.content_hash(), c.content_hash());
    }

    #[test]
    fn fp_affine_fixed_on_integers() {
        let c = cfg(
            r#"{"task":"affine-fixed","seed":1,"group":{"type":"fp","generators":["a"]},
                "rep":{"kind":"trivial","dim":1},"cocycle":{"a":["1"]}}"#,
        );
        let r = run_task(&c).unwrap();
        assert_eq!(r.status, Status::Pass, "{}", emit_report(&r, Format::Json));
        assert_eq!(r.results["fixed_set"], Value::Null);
        let v = r.results["displacement"]["value"].as_f64().unwrap();
        assert!((v - 1.0).abs() < 1e-6);
    }

    #[test]
    fn emitted_reports_are_stable() {
        let c = cfg(
            r#"{"task":"cohomology","group":{"type":"sample","name":"S3"},"rep":{"kind":"rotation"}}"#,
        );
        let a = emit_report(&run_task(&c).unwrap(), Format::Json);
        let b = emit_report(&run_task(&c).unwrap(), Format::Json);
        assert_eq!(a, b);
        assert!(a.contains("\"status\": \"pass\""));
        let t = emit_report(&run_task(&c).unwrap(), Format::Table);
        assert!(t
            .lines()
            .any(|l| l.starts_with("status") && l.ends_with("pass")));
    }

    #[test]
    fn exhausted_budget_reports_best_bound() {
        let c = cfg(
            r#"{"task":"approximation-suite","seed":3,"group":{"type":"sample","name":"Z4"},
                "rep":{"kind":"rotation"},"epsilon":1e-12,"budget":{"max_steps":1}}"#,
        );
        let r = run_task(&c).unwrap();
        assert_eq!(r.status, Status::BudgetExhausted);
        assert_eq!(r.status.exit_code(), 3);
        assert!(emit_report(&r, Format::Json).contains("\"best_bound\""));
    }
}
