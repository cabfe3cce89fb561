//! Run configurations and external solver adapters.

mod output;
mod process;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{Program, RuleKind};
use crate::model::SolverResult;
use crate::parser::{serialize_program_as, Dialect};
use crate::testlang::{TestCase, TestSuite};

pub use output::{parse_clingo_output, parse_dlv_output, OutputError};
pub use process::{invoke_solver, set_max_concurrent_solvers, solver_arguments, SolverTranscript};

/// Default location of the configuration file, relative to the working directory.
pub const CONFIG_FILE_NAME: &str = "aspunit.config.json";
pub const DEFAULT_TIMEOUT_SECONDS: u64 = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    #[default]
    Internal,
    Dlv,
    Clingo,
}

impl SolverKind {
    /// Guess from an executable name: anything mentioning clingo or clasp is
    /// clingo-style, everything else DLV-style.
    pub fn infer_from_path(path: &str) -> SolverKind {
        let name = Path::new(path)
            .file_name()
            .map(|n| n.to_string_lossy().to_lowercase())
            .unwrap_or_default();
        if name.contains("clingo") || name.contains("clasp") {
            SolverKind::Clingo
        } else {
            SolverKind::Dlv
        }
    }
}

impl std::str::FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "internal" => Ok(SolverKind::Internal),
            "dlv" => Ok(SolverKind::Dlv),
            "clingo" => Ok(SolverKind::Clingo),
            other => Err(format!("unknown solver kind {other}; expected internal, dlv or clingo")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfiguration {
    pub name: String,
    pub solver_kind: SolverKind,
    pub solver_path: Option<PathBuf>,
    pub options: String,
    /// 0 means all answer sets.
    pub max_models: usize,
    pub timeout_seconds: u64,
}

impl Default for RunConfiguration {
    fn default() -> Self {
        RunConfiguration {
            name: String::new(),
            solver_kind: SolverKind::Internal,
            solver_path: None,
            options: String::new(),
            max_models: 0,
            timeout_seconds: DEFAULT_TIMEOUT_SECONDS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ConfigEntry {
    pub name: String,
    #[serde(default)]
    pub kind: Option<SolverKind>,
    #[serde(default)]
    pub path: Option<String>,
    #[serde(default)]
    pub options: Option<String>,
    #[serde(default)]
    pub max_models: Option<usize>,
    #[serde(default)]
    pub timeout_seconds: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct ConfigFile {
    pub configurations: Vec<ConfigEntry>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<ConfigFile, AdapterError> {
        let cfg: ConfigFile = serde_json::from_str(text).map_err(|e| AdapterError::Config(e.to_string()))?;
        let mut names = BTreeSet::new();
        for e in &cfg.configurations {
            if !names.insert(e.name.as_str()) {
                return Err(AdapterError::Config(format!("duplicate configuration name {}", e.name)));
            }
            if e.timeout_seconds == Some(0) {
                return Err(AdapterError::Config(format!("configuration {}: timeoutSeconds must be positive", e.name)));
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<ConfigFile, AdapterError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AdapterError::Config(format!("cannot read {}: {e}", path.display())))?;
        ConfigFile::parse(&text)
    }

    pub fn entry(&self, name: &str) -> Option<&ConfigEntry> {
        self.configurations.iter().find(|e| e.name == name)
    }
}

/// Settings given on the command line; they override everything else.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CliOverrides {
    pub solver: Option<SolverKind>,
    pub solver_path: Option<String>,
    pub options: Option<String>,
    pub max_models: Option<usize>,
    pub timeout_seconds: Option<u64>,
}

/// Resolves the run configuration for `case` (or the suite as a whole).
///
/// Precedence, highest first: command line, the case's `newOptions` (options
/// only), the suite's invocation path and options, the configuration-file
/// entry named like the invocation, built-in defaults.
pub fn resolve_configuration(
    suite: &TestSuite,
    case: Option<&TestCase>,
    config: Option<&ConfigFile>,
    cli: &CliOverrides,
) -> Result<RunConfiguration, AdapterError> {
    let entry = config.and_then(|c| c.entry(&suite.invocation_name));
    let path = cli
        .solver_path
        .clone()
        .or_else(|| suite.solver_path.clone())
        .or_else(|| entry.and_then(|e| e.path.clone()));
    let kind = cli
        .solver
        .or_else(|| cli.solver_path.as_deref().map(SolverKind::infer_from_path))
        .or_else(|| suite.solver_path.as_deref().map(SolverKind::infer_from_path))
        .or_else(|| entry.and_then(|e| e.kind))
        .or_else(|| entry.and_then(|e| e.path.as_deref()).map(SolverKind::infer_from_path))
        .unwrap_or_default();
    let options = cli
        .options
        .clone()
        .or_else(|| case.and_then(|c| c.new_options.clone()))
        .or_else(|| suite.solver_options.clone())
        .or_else(|| entry.and_then(|e| e.options.clone()))
        .unwrap_or_default();

    if kind != SolverKind::Internal && path.is_none() {
        return Err(AdapterError::UnknownInvocation(suite.invocation_name.clone()));
    }
    Ok(RunConfiguration {
        name: suite.invocation_name.clone(),
        solver_kind: kind,
        solver_path: if kind == SolverKind::Internal { None } else { path.map(PathBuf::from) },
        options,
        max_models: cli.max_models.or_else(|| entry.and_then(|e| e.max_models)).unwrap_or(0),
        timeout_seconds: cli
            .timeout_seconds
            .or_else(|| entry.and_then(|e| e.timeout_seconds))
            .unwrap_or(DEFAULT_TIMEOUT_SECONDS)
            .max(1),
    })
}

#[derive(Debug, Error)]
pub enum AdapterError {
    #[error("solver executable {} could not be started: {reason}", path.display())]
    ExecutableMissing { path: PathBuf, reason: String },
    #[error("solver timed out after {seconds} s; program kept at {}", program_file.display())]
    Timeout { seconds: u64, program_file: PathBuf },
    #[error("solver exited with code {exit_code}: {reason}")]
    Failed { exit_code: i32, reason: String },
    #[error("{source}; program kept at {}", program_file.display())]
    Retained {
        #[source]
        source: Box<AdapterError>,
        program_file: PathBuf,
    },
    #[error("run configuration {0} has no solver path")]
    NoSolverPath(String),
    #[error("invocation {0} not found: no solver path in the suite, the configuration file or on the command line")]
    UnknownInvocation(String),
    #[error("the internal solver is not run as a subprocess")]
    NotExternal,
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl AdapterError {
    fn with_program_file(self, path: PathBuf) -> AdapterError {
        match self {
            AdapterError::Timeout { seconds, .. } => AdapterError::Timeout {
                seconds,
                program_file: path,
            },
            other => AdapterError::Retained {
                source: Box::new(other),
                program_file: path,
            },
        }
    }

    /// The kept temporary program file, if any.
    pub fn program_file(&self) -> Option<&Path> {
        match self {
            AdapterError::Timeout { program_file, .. } | AdapterError::Retained { program_file, .. } => {
                Some(program_file)
            }
            _ => None,
        }
    }

    pub fn is_timeout(&self) -> bool {
        match self {
            AdapterError::Timeout { .. } => true,
            AdapterError::Retained { source, .. } => source.is_timeout(),
            _ => false,
        }
    }

    pub fn is_executable_missing(&self) -> bool {
        match self {
            AdapterError::ExecutableMissing { .. } => true,
            AdapterError::Retained { source, .. } => source.is_executable_missing(),
            _ => false,
        }
    }
}

/// Weak-constraint levels of `p`, highest first.
pub fn weak_levels(p: &Program) -> Vec<u64> {
    let levels: BTreeSet<u64> = p
        .rules()
        .iter()
        .filter_map(|r| match r.kind {
            RuleKind::WeakConstraint { level, .. } => Some(level),
            _ => None,
        })
        .collect();
    levels.into_iter().rev().collect()
}

fn exit_ok(kind: SolverKind, code: i32) -> bool {
    match kind {
        // clingo reports satisfiability in its exit code
        SolverKind::Clingo => matches!(code, 0 | 10 | 20 | 30),
        _ => code == 0,
    }
}

/// Parses a transcript with the parser matching `kind`.
pub fn parse_transcript(
    kind: SolverKind,
    t: &SolverTranscript,
    max_models: usize,
    levels: Option<&[u64]>,
) -> Result<SolverResult, AdapterError> {
    let parsed = match kind {
        SolverKind::Clingo => parse_clingo_output(&t.stdout, max_models, levels),
        _ => parse_dlv_output(&t.stdout, max_models),
    };
    match parsed {
        Ok(r) if exit_ok(kind, t.exit_code) => Ok(r.sorted()),
        Ok(_) => Err(AdapterError::Failed {
            exit_code: t.exit_code,
            reason: first_line(&t.stderr).unwrap_or("no diagnostics on stderr").to_string(),
        }),
        Err(e) => Err(AdapterError::Failed {
            exit_code: t.exit_code,
            reason: match first_line(&t.stderr) {
                Some(s) => format!("{e}; stderr: {s}"),
                None => e.to_string(),
            },
        }),
    }
}

fn first_line(s: &str) -> Option<&str> {
    s.lines().map(str::trim).find(|l| !l.is_empty())
}

/// Serializes `p` for the configured solver, runs it and parses its output.
/// The transcript is returned alongside the result for reporting.
pub fn solve_external(cfg: &RunConfiguration, p: &Program) -> Result<(SolverResult, SolverTranscript), AdapterError> {
    let dialect = match cfg.solver_kind {
        SolverKind::Internal => return Err(AdapterError::NotExternal),
        SolverKind::Clingo => Dialect::Clingo,
        SolverKind::Dlv => Dialect::Dlv,
    };
    let file = process::write_program(&serialize_program_as(p, dialect), cfg.solver_kind)?;
    let levels = weak_levels(p);
    let run = process::run_on_file(cfg, file.path()).and_then(|t| {
        let r = parse_transcript(cfg.solver_kind, &t, cfg.max_models, Some(&levels))?;
        Ok((r, t))
    });
    run.map_err(|e| process::retain_on_error(file, e))
}
