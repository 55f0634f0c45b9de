//! Batch commands behind the `qlab` binary.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use qlab_core::constructible::{
    build_bb_l, build_classical_l, build_frak_l, check_two_valued, run_paper_suite, DefConfig, SuiteOptions,
};
use qlab_core::formula::parse;
use qlab_core::model::{
    build_v_stage, eval_sentence, read_stage_dump, write_stage_dump, BudgetExceeded, ElemId, HierarchyTag, Stage,
    Universe,
};
use qlab_core::quantale::{
    builtin, check_heyting_collapse, validate_theorem_suite, QElem, Quantale, QuantaleError, QuantaleFile,
};
use qlab_core::report::{CheckRecord, Report, Status, Witness};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA: &str = "qlab-report/1";
pub const DEFAULT_BUDGET: usize = 100_000;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Input { path: String, message: String },
    #[error(transparent)]
    Quantale(#[from] QuantaleError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Validate,
    Stages,
    Eval,
    Verify,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Validate => "validate",
            Command::Stages => "stages",
            Command::Eval => "eval",
            Command::Verify => "verify",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Algebra,
    Paper,
}

/// Everything one invocation needs.
#[derive(Clone, Debug)]
pub struct RunSpec {
    /// Built-in name such as `lukasiewicz:3`, or a path to a JSON table file.
    pub quantale: String,
    pub command: Command,
    pub alpha: usize,
    pub cfg: DefConfig,
    pub hierarchy: HierarchyTag,
    /// Labels of the values allowed in `V` stages; all values when empty.
    pub values: Vec<String>,
    pub suite: Suite,
    pub report: Option<PathBuf>,
    pub dump: Option<PathBuf>,
    pub formula: Option<String>,
    pub bindings: Vec<(String, u32)>,
    /// Stage used as carrier by `eval`; the last one when unset.
    pub stage: Option<usize>,
    pub budget: usize,
}

impl RunSpec {
    pub fn new(command: Command, quantale: impl Into<String>) -> Self {
        RunSpec {
            quantale: quantale.into(),
            command,
            alpha: 3,
            cfg: DefConfig::default(),
            hierarchy: HierarchyTag::FrakL,
            values: Vec::new(),
            suite: Suite::Paper,
            report: None,
            dump: None,
            formula: None,
            bindings: Vec::new(),
            stage: None,
            budget: DEFAULT_BUDGET,
        }
    }
}

/// What a run writes to `--report`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub command: Command,
    pub quantale: String,
    pub alpha: usize,
    pub cfg: String,
    pub started: String,
    pub finished: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub result: Option<BTreeMap<String, String>>,
    pub checks: Vec<CheckRecord>,
}

impl RunReport {
    fn new(spec: &RunSpec, quantale: &str, report: Report, started: String) -> Self {
        let status = if report.passed() { Status::Pass } else { Status::Fail };
        RunReport {
            schema: SCHEMA.into(),
            command: spec.command,
            quantale: quantale.to_string(),
            alpha: spec.alpha,
            cfg: spec.cfg.to_string(),
            started,
            finished: now(),
            status,
            result: None,
            checks: report.checks,
        }
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    /// Copy with the timestamps blanked, for run-to-run comparison.
    pub fn without_timestamps(&self) -> RunReport {
        RunReport { started: String::new(), finished: String::new(), ..self.clone() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    pub fn summary(&self) -> String {
        let mut out = format!("{} {} cfg: {}\n", self.command, self.quantale, self.cfg);
        out.push_str(&Report { checks: self.checks.clone() }.to_string());
        if let Some(r) = &self.result {
            for (k, v) in r {
                out.push_str(&format!("{k}: {v}\n"));
            }
        }
        let failed = self.checks.iter().filter(|c| c.status == Status::Fail).count();
        match failed {
            0 => out.push_str(&format!("PASS ({} checks)\n", self.checks.len())),
            n => out.push_str(&format!("FAIL ({n} of {} checks failed)\n", self.checks.len())),
        }
        out
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Reads `QLAB_BUDGET`, falling back to the default element cap.
pub fn budget_from_env() -> Result<usize, CliError> {
    match std::env::var("QLAB_BUDGET") {
        Ok(v) => v.trim().parse().map_err(|_| CliError::Usage(format!("QLAB_BUDGET must be a number, got `{v}`"))),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

/// A built-in name, or a JSON file holding a [`QuantaleFile`].
pub fn load_quantale(source: &str) -> Result<Quantale, CliError> {
    let (name, built) = read_source(source)?;
    built.map_err(|e| CliError::Input { path: name, message: e.to_string() })
}

/// Parses the source; the inner result carries axiom violations of a well-formed table.
fn read_source(source: &str) -> Result<(String, Result<Quantale, QuantaleError>), CliError> {
    let path = Path::new(source);
    if !path.exists() {
        return match builtin(source) {
            Ok(q) => Ok((source.into(), Ok(q))),
            Err(QuantaleError::UnknownBuiltin(_)) => Err(CliError::Input {
                path: source.into(),
                message: "neither a built-in quantale nor a readable file".into(),
            }),
            Err(e) => Err(e.into()),
        };
    }
    let input = |message: String| CliError::Input { path: source.into(), message };
    let text = std::fs::read_to_string(path).map_err(|e| input(e.to_string()))?;
    let file: QuantaleFile = serde_json::from_str(&text).map_err(|e| {
        let line = text.lines().nth(e.line().saturating_sub(1)).unwrap_or("").trim();
        input(format!("{e}\n  | {line}"))
    })?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or(source).to_string();
    let built = file.build(name.clone());
    Ok((name, built))
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}

fn def_config(spec: &RunSpec) -> DefConfig {
    DefConfig { budget: spec.budget, ..spec.cfg }
}

pub fn cmd_validate(spec: &RunSpec) -> Result<RunReport, CliError> {
    let started = now();
    let (name, built) = read_source(&spec.quantale)?;
    let mut report = Report::new();
    match built {
        Ok(q) => {
            report.extend(validate_theorem_suite(&q));
            report.extend(check_heyting_collapse(&q));
        }
        Err(e) => report.push(CheckRecord {
            check: "axiom.construction".into(),
            stage: None,
            status: Status::Fail,
            detail: Some("tables do not form a quantale".into()),
            violations: 1,
            witnesses: vec![Witness::new().with("error", e)],
        }),
    }
    Ok(RunReport::new(spec, &name, report, started))
}

fn value_set(q: &Quantale, labels: &[String]) -> Result<Vec<QElem>, CliError> {
    if labels.is_empty() {
        return Ok(q.elements().collect());
    }
    labels
        .iter()
        .map(|l| q.by_label(l).ok_or_else(|| CliError::Usage(format!("`{l}` is not a value of {}", q.name()))))
        .collect()
}

/// A hierarchy built in a universe of its own, with the config text stamped on its dump.
pub struct Built {
    pub universe: Universe,
    pub stages: Vec<Stage>,
    pub config: String,
    pub truncated: Option<BudgetExceeded>,
}

fn build(spec: &RunSpec, q: &Quantale) -> Result<Built, CliError> {
    let cfg = def_config(spec);
    let cut = |r: Result<Vec<Stage>, BudgetExceeded>| match r {
        Ok(s) => (s, None),
        Err(mut e) => (std::mem::take(&mut e.partial), Some(e)),
    };
    Ok(match spec.hierarchy {
        HierarchyTag::ClassicalL => match build_classical_l(spec.alpha, &cfg) {
            Ok(l) => {
                let stages = l.stages.iter().map(|s| s.as_stage(&cfg.to_string())).collect();
                Built { universe: l.universe, stages, config: cfg.to_string(), truncated: None }
            }
            Err(mut e) => {
                let universe = Universe::new(builtin("boolean:1")?);
                let stages = std::mem::take(&mut e.partial);
                Built { universe, stages, config: cfg.to_string(), truncated: Some(e) }
            }
        },
        tag => {
            let universe = Universe::new(q.clone());
            let (stages, truncated, config) = match tag {
                HierarchyTag::V => {
                    let values = value_set(q, &spec.values)?;
                    let (s, t) = cut(build_v_stage(&universe, spec.alpha, &values, spec.budget));
                    let c = s.first().map(|s| s.config.clone()).unwrap_or_default();
                    (s, t, c)
                }
                HierarchyTag::FrakL => {
                    let (s, t) = cut(build_frak_l(&universe, spec.alpha, &cfg));
                    (s, t, cfg.to_string())
                }
                _ => {
                    let (s, t) = cut(build_bb_l(&universe, spec.alpha, &cfg));
                    (s, t, cfg.to_string())
                }
            };
            Built { universe, stages, config, truncated }
        }
    })
}

fn truncation_record(tag: HierarchyTag, e: &BudgetExceeded) -> CheckRecord {
    CheckRecord {
        check: format!("build.{tag}"),
        stage: Some(e.stage.to_string()),
        status: Status::Fail,
        detail: Some(format!("truncated: {e}")),
        violations: 1,
        witnesses: Vec::new(),
    }
}

/// Builds the requested hierarchy, checks two-valuedness and returns the dump text.
pub fn cmd_stages(spec: &RunSpec) -> Result<(RunReport, String), CliError> {
    let started = now();
    let q = load_quantale(&spec.quantale)?;
    let b = build(spec, &q)?;
    let mut report = Report::new();
    let sizes: Vec<String> = b.stages.iter().map(|s| s.len().to_string()).collect();
    let mut info = CheckRecord::info(format!("build.{}", spec.hierarchy), format!("sizes {}", sizes.join(",")));
    if let Some(last) = b.stages.last() {
        info.stage = Some(format!("{}{}", last.tag, last.label));
    }
    report.push(info);
    if let Some(e) = &b.truncated {
        report.push(truncation_record(spec.hierarchy, e));
    }
    let mut two = check_two_valued(&b.universe, &b.stages);
    match spec.hierarchy {
        HierarchyTag::V => {
            two.check = "model.values_off_two".into();
            two.status = Status::Info;
            two.detail = Some(if two.violations > 0 {
                format!("{} values outside {{0,1}}", two.violations)
            } else {
                "all values in {0,1}".into()
            });
            report.push(two);
        }
        _ => report.push(two),
    }
    let dump = write_stage_dump(&b.universe, spec.hierarchy, spec.alpha, &b.config, &b.stages);
    if let Some(path) = &spec.dump {
        write_atomic(path, &dump)?;
    }
    let mut run = RunReport::new(spec, q.name(), report, started);
    let mut result = BTreeMap::new();
    result.insert("sizes".to_string(), sizes.join(","));
    run.result = Some(result);
    Ok((run, dump))
}

/// Evaluates a formula over a stage loaded from `--dump` or built from the run options.
pub fn cmd_eval(spec: &RunSpec) -> Result<RunReport, CliError> {
    let started = now();
    let text = spec.formula.as_deref().ok_or_else(|| CliError::Usage("eval needs a formula".into()))?;
    let formula = parse(text).map_err(|e| CliError::Input {
        path: "formula".into(),
        message: format!("{e}\n  | {text}\n  | {}^", " ".repeat(e.column.saturating_sub(1))),
    })?;
    let q = load_quantale(&spec.quantale)?;
    let (universe, stages, ids) = match &spec.dump {
        Some(path) => {
            let u = Universe::new(q.clone());
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input { path: path.display().to_string(), message: e.to_string() })?;
            let d = read_stage_dump(&text, &u)
                .map_err(|e| CliError::Input { path: path.display().to_string(), message: e.to_string() })?;
            if d.quantale != q.name() {
                return Err(CliError::Usage(format!("dump was built over {}, not {}", d.quantale, q.name())));
            }
            (u, d.stages, Some(d.ids))
        }
        None => {
            let b = build(spec, &q)?;
            (b.universe, b.stages, None)
        }
    };
    let carrier: Vec<ElemId> = match spec.stage {
        Some(k) => stages
            .iter()
            .find(|s| s.label == k)
            .ok_or_else(|| CliError::Usage(format!("no stage {k}")))?
            .members
            .clone(),
        None => stages.last().map(|s| s.members.clone()).unwrap_or_default(),
    };
    let resolve = |id: u32| -> Result<ElemId, CliError> {
        let mapped = match &ids {
            Some(ids) => ids.get(&id).copied(),
            None => Some(ElemId(id)).filter(|&e| universe.contains(e)),
        };
        mapped.ok_or_else(|| CliError::Usage(format!("#{id} does not name an element")))
    };
    let formula = formula.try_map_consts(&mut |id| resolve(id.0))?;
    let mut env = BTreeMap::new();
    for (name, id) in &spec.bindings {
        env.insert(name.clone(), resolve(*id)?);
    }
    let value = eval_sentence(&universe, &carrier, &formula, &env).map_err(|e| CliError::Usage(e.to_string()))?;
    let qu = universe.quantale();
    let mut record = CheckRecord::info("eval.value", qu.label(value));
    record.stage = Some(format!("{} elements", carrier.len()));
    let mut report = Report::new();
    report.push(record);
    let mut run = RunReport::new(spec, q.name(), report, started);
    let mut result = BTreeMap::new();
    result.insert("formula".to_string(), formula.to_string());
    result.insert("value".to_string(), qu.label(value).to_string());
    run.result = Some(result);
    Ok(run)
}

pub fn cmd_verify(spec: &RunSpec) -> Result<RunReport, CliError> {
    let started = now();
    let q = load_quantale(&spec.quantale)?;
    let report = match spec.suite {
        Suite::Algebra => {
            let mut r = validate_theorem_suite(&q);
            r.extend(check_heyting_collapse(&q));
            r
        }
        Suite::Paper => {
            let opts = SuiteOptions { alpha: spec.alpha, cfg: def_config(spec), budget: spec.budget, ..Default::default() };
            run_paper_suite(&q, &opts)
        }
    };
    Ok(RunReport::new(spec, q.name(), report, started))
}

/// Runs the command of `spec`, writing the report file when requested.
pub fn run(spec: &RunSpec) -> Result<RunReport, CliError> {
    let report = match spec.command {
        Command::Validate => cmd_validate(spec)?,
        Command::Stages => cmd_stages(spec)?.0,
        Command::Eval => cmd_eval(spec)?,
        Command::Verify => cmd_verify(spec)?,
    };
    if let Some(path) = &spec.report {
        write_atomic(path, &report.to_json())?;
    }
    Ok(report)
}
