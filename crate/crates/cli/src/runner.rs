//! Loading a suite, running its cases and collecting outcomes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};

use aspunit_core::adapter::{
    resolve_configuration, set_max_concurrent_solvers, solve_external, CliOverrides, ConfigFile, RunConfiguration,
    SolverKind, CONFIG_FILE_NAME,
};
use aspunit_core::analysis::{apply_filter, assemble_unit};
use aspunit_core::assertions::{evaluate_assertion, Status};
use aspunit_core::ast::Program;
use aspunit_core::diag::ParseDiagnostic;
use aspunit_core::model::{AnswerSet, SolverResult};
use aspunit_core::parser::{merge_programs, parse_program};
use aspunit_core::solver::{ground, Enumerator};
use aspunit_core::testlang::{parse_test_suite, validate_suite, InputSpec, Mode, TestCase, TestSuite};

/// Name of the pseudo case that carries suite loading errors.
pub const SUITE_CASE: &str = "__suite__";

/// Origin recorded on rules read from inline `input` statements.
pub const INLINE_ORIGIN: &str = "input";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config_path: Option<PathBuf>,
    pub overrides: CliOverrides,
    /// Concurrent cases; `None` means one per processor.
    pub jobs: Option<usize>,
    /// Directory that relative input paths resolve against, instead of the
    /// suite file's directory.
    pub base_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssertionReport {
    pub kind: String,
    /// Source form of the assertion; empty for setup errors.
    pub assertion: String,
    pub status: Status,
    pub detail: String,
    pub witnesses: Vec<usize>,
    /// The witness answer sets after filtering, in `witnesses` order.
    pub witness_models: Vec<String>,
}

impl AssertionReport {
    fn setup_error(kind: &str, detail: impl Into<String>) -> Self {
        AssertionReport {
            kind: kind.to_string(),
            assertion: String::new(),
            status: Status::Error,
            detail: detail.into(),
            witnesses: Vec::new(),
            witness_models: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProgramStats {
    pub rules: usize,
    pub answer_sets: usize,
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseReport {
    pub name: String,
    pub mode: Mode,
    pub warnings: Vec<String>,
    pub assertions: Vec<AssertionReport>,
    pub stats: Option<ProgramStats>,
    /// Command line of the external solver run, if there was one.
    pub transcript: Option<String>,
    pub duration: Duration,
}

impl CaseReport {
    /// Error beats Fail beats Pass; a case without assertions passes.
    pub fn status(&self) -> Status {
        let mut s = Status::Pass;
        for a in &self.assertions {
            match a.status {
                Status::Error => return Status::Error,
                Status::Fail => s = Status::Fail,
                Status::Pass => {}
            }
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Totals {
    pub passed: usize,
    pub failed: usize,
    pub errored: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestReport {
    pub suite_name: String,
    pub cases: Vec<CaseReport>,
    pub totals: Totals,
    pub started_at: DateTime<Utc>,
    /// Suite-level warnings (parsing, validation).
    pub warnings: Vec<String>,
}

impl TestReport {
    pub fn new(suite_name: String, cases: Vec<CaseReport>, warnings: Vec<String>, started_at: DateTime<Utc>) -> Self {
        let mut totals = Totals::default();
        for c in &cases {
            match c.status() {
                Status::Pass => totals.passed += 1,
                Status::Fail => totals.failed += 1,
                Status::Error => totals.errored += 1,
            }
        }
        TestReport {
            suite_name,
            cases,
            totals,
            started_at,
            warnings,
        }
    }

    /// 0 when everything passed, 1 on an assertion failure, 2 on any error.
    pub fn exit_code(&self) -> i32 {
        if self.totals.errored > 0 {
            2
        } else if self.totals.failed > 0 {
            1
        } else {
            0
        }
    }
}

/// Parsed inputs, keyed as the suite names them.
#[derive(Debug, Default)]
struct Inputs {
    programs: BTreeMap<InputSpec, Program>,
    failures: BTreeMap<InputSpec, String>,
}

impl Inputs {
    fn load(specs: impl IntoIterator<Item = InputSpec>, base: &Path) -> Inputs {
        let mut out = Inputs::default();
        for spec in specs {
            if out.programs.contains_key(&spec) || out.failures.contains_key(&spec) {
                continue;
            }
            let loaded = match &spec {
                InputSpec::Inline(text) => parse_program(text, INLINE_ORIGIN).map_err(|d| d.to_string()),
                InputSpec::File(path) => {
                    let full = base.join(path);
                    let origin = full.display().to_string();
                    match std::fs::read_to_string(&full) {
                        Ok(text) => parse_program(&text, &origin).map_err(|d| d.to_string()),
                        Err(e) => Err(format!("cannot read input file {origin}: {e}")),
                    }
                }
            };
            match loaded {
                Ok(p) => {
                    out.programs.insert(spec, p.value);
                }
                Err(e) => {
                    out.failures.insert(spec, e);
                }
            }
        }
        out
    }

    fn get(&self, specs: &[InputSpec]) -> Result<Vec<&Program>, String> {
        specs
            .iter()
            .map(|s| match self.programs.get(s) {
                Some(p) => Ok(p),
                None => Err(self.failures.get(s).cloned().unwrap_or_else(|| format!("unresolved input {s}"))),
            })
            .collect()
    }
}

fn suite_inputs(suite: &TestSuite) -> Vec<InputSpec> {
    suite
        .global_inputs
        .iter()
        .chain(suite.test_cases.iter().flat_map(|c| &c.local_inputs))
        .cloned()
        .collect()
}

fn base_dir(suite_path: &Path, opts: &RunOptions) -> PathBuf {
    opts.base_dir
        .clone()
        .unwrap_or_else(|| suite_path.parent().map(Path::to_path_buf).unwrap_or_default())
}

fn load_config(opts: &RunOptions) -> Result<Option<ConfigFile>, String> {
    match &opts.config_path {
        Some(p) => ConfigFile::load(p).map(Some).map_err(|e| e.to_string()),
        None => {
            let default = Path::new(CONFIG_FILE_NAME);
            if default.is_file() {
                ConfigFile::load(default).map(Some).map_err(|e| e.to_string())
            } else {
                Ok(None)
            }
        }
    }
}

fn suite_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn load_failure(path: &Path, detail: String, started_at: DateTime<Utc>) -> TestReport {
    let case = CaseReport {
        name: SUITE_CASE.to_string(),
        mode: Mode::WholeProgram,
        warnings: Vec::new(),
        assertions: vec![AssertionReport::setup_error("load", detail)],
        stats: None,
        transcript: None,
        duration: Duration::ZERO,
    };
    TestReport::new(suite_name(path), vec![case], Vec::new(), started_at)
}

/// Runs every case of the suite at `suite_path`.
pub fn run_suite(suite_path: &Path, opts: &RunOptions) -> TestReport {
    let started_at = Utc::now();
    let text = match std::fs::read_to_string(suite_path) {
        Ok(t) => t,
        Err(e) => return load_failure(suite_path, format!("cannot read {}: {e}", suite_path.display()), started_at),
    };
    let origin = suite_path.display().to_string();
    let parsed = match parse_test_suite(&text, &origin) {
        Ok(p) => p,
        Err(d) => return load_failure(suite_path, d.to_string(), started_at),
    };
    let config = match load_config(opts) {
        Ok(c) => c,
        Err(e) => return load_failure(suite_path, e, started_at),
    };
    let suite = parsed.value;
    let base = base_dir(suite_path, opts);
    let inputs = Inputs::load(suite_inputs(&suite), &base);
    let mut warnings: Vec<String> = parsed.warnings.iter().map(ToString::to_string).collect();
    warnings.extend(
        validate_suite(&suite, &inputs.programs, &origin)
            .into_iter()
            .filter(|d| !d.is_error())
            .map(|d| d.to_string()),
    );

    let ctx = CaseContext {
        suite: &suite,
        inputs: &inputs,
        config: config.as_ref(),
        overrides: &opts.overrides,
        base: &base,
    };
    let jobs = opts
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);
    set_max_concurrent_solvers(jobs);
    let cases = run_cases(&ctx, &suite.all_cases(), jobs);
    TestReport::new(suite_name(suite_path), cases, warnings, started_at)
}

#[cfg(feature = "parallel")]
fn run_cases(ctx: &CaseContext<'_>, cases: &[TestCase], jobs: usize) -> Vec<CaseReport> {
    use rayon::prelude::*;
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        // collect keeps suite order whatever the completion order
        Ok(pool) => pool.install(|| cases.par_iter().map(|c| ctx.run(c)).collect()),
        Err(_) => cases.iter().map(|c| ctx.run(c)).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_cases(ctx: &CaseContext<'_>, cases: &[TestCase], _jobs: usize) -> Vec<CaseReport> {
    cases.iter().map(|c| ctx.run(c)).collect()
}

struct CaseContext<'a> {
    suite: &'a TestSuite,
    inputs: &'a Inputs,
    config: Option<&'a ConfigFile>,
    overrides: &'a CliOverrides,
    base: &'a Path,
}

impl CaseContext<'_> {
    fn run(&self, case: &TestCase) -> CaseReport {
        let start = Instant::now();
        let mut report = CaseReport {
            name: case.name.clone(),
            mode: case.mode,
            warnings: Vec::new(),
            assertions: Vec::new(),
            stats: None,
            transcript: None,
            duration: Duration::ZERO,
        };
        if let Err(e) = self.run_into(case, &mut report) {
            report.assertions = vec![e];
        }
        report.duration = start.elapsed();
        report
    }

    #[allow(clippy::result_large_err)]
    fn run_into(&self, case: &TestCase, report: &mut CaseReport) -> Result<(), AssertionReport> {
        let input_error = |e: String| AssertionReport::setup_error("input", e);
        let global = self.inputs.get(&self.suite.global_inputs).map_err(input_error)?;
        let local = self.inputs.get(&case.local_inputs).map_err(input_error)?;
        let merge = |ps: Vec<&Program>| merge_programs(ps).map_err(|d| AssertionReport::setup_error("input", d.to_string()));
        let global = merge(global)?;
        let local = merge(local)?;

        let base = self.base;
        let unit = assemble_unit(&global, &local, case, |p| base.join(p).display().to_string())
            .map_err(|e| AssertionReport::setup_error("unit", e.to_string()))?;
        report.warnings = unit.warnings.clone();

        let cfg = resolve_configuration(self.suite, Some(case), self.config, self.overrides)
            .map_err(|e| AssertionReport::setup_error("solver", e.to_string()))?;
        let (result, transcript) = solve(&cfg, &unit.program).map_err(|e| AssertionReport::setup_error("solver", e))?;
        report.transcript = transcript;
        report.stats = Some(ProgramStats {
            rules: unit.program.len(),
            answer_sets: result.len(),
            complete: result.complete,
        });

        // with weak constraints only best models count, as DLV reports them
        let result = result.optimal();
        let filtered: Vec<AnswerSet> = result
            .answer_sets
            .iter()
            .map(|a| apply_filter(a, case.filter.as_ref(), &unit.selected))
            .collect();
        report.assertions = case
            .assertions
            .iter()
            .map(|a| {
                let o = evaluate_assertion(a, &result, &filtered);
                AssertionReport {
                    kind: a.kind().to_string(),
                    assertion: a.to_string(),
                    status: o.status,
                    detail: o.detail,
                    witness_models: o.witness_sets.iter().map(|&i| filtered[i].to_string()).collect(),
                    witnesses: o.witness_sets,
                }
            })
            .collect();
        Ok(())
    }
}

/// Solves `p` with the configured solver. Returns the result and, for
/// external solvers, the command line that produced it.
pub fn solve(cfg: &RunConfiguration, p: &Program) -> Result<(SolverResult, Option<String>), String> {
    match cfg.solver_kind {
        SolverKind::Internal => {
            let g = ground(p).map_err(|e| e.to_string())?;
            let e = Enumerator {
                max_models: cfg.max_models,
                ..Enumerator::default()
            };
            e.enumerate(&g).map(|r| (r, None)).map_err(|e| e.to_string())
        }
        _ => solve_external(cfg, p)
            .map(|(r, t)| (r, Some(t.command)))
            .map_err(|e| e.to_string()),
    }
}

/// Outcome of a static check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub diagnostics: Vec<ParseDiagnostic>,
}

impl CheckOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.diagnostics.iter().any(ParseDiagnostic::is_error) {
            2
        } else {
            0
        }
    }
}

/// Parses and validates the suite without solving anything.
pub fn check_suite(suite_path: &Path, base_dir_override: Option<&Path>) -> CheckOutcome {
    let origin = suite_path.display().to_string();
    let text = match std::fs::read_to_string(suite_path) {
        Ok(t) => t,
        Err(e) => {
            return CheckOutcome {
                diagnostics: vec![ParseDiagnostic::error(&origin, 1, 1, format!("cannot read {origin}: {e}"))],
            }
        }
    };
    let parsed = match parse_test_suite(&text, &origin) {
        Ok(p) => p,
        Err(d) => return CheckOutcome { diagnostics: d.0 },
    };
    let opts = RunOptions {
        base_dir: base_dir_override.map(Path::to_path_buf),
        ..RunOptions::default()
    };
    let base = base_dir(suite_path, &opts);
    let suite = parsed.value;
    let inputs = Inputs::load(suite_inputs(&suite), &base);
    let mut diagnostics = parsed.warnings;
    for msg in inputs.failures.values() {
        diagnostics.push(ParseDiagnostic::error(&origin, 1, 1, msg.clone()));
    }
    // unresolved inputs were reported above with their cause
    diagnostics.extend(
        validate_suite(&suite, &inputs.programs, &origin)
            .into_iter()
            .filter(|d| !d.message.starts_with("unresolved input")),
    );
    CheckOutcome { diagnostics }
}
