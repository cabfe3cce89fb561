//! Running external solvers as subprocesses.

use std::io::{Read, Write};
use std::path::Path;
use std::process::{Child, Command, Stdio};
use std::sync::{Condvar, Mutex, OnceLock};
use std::thread;
use std::time::{Duration, Instant};

use serde::Serialize;

use super::{AdapterError, RunConfiguration, SolverKind};

/// Everything observable about one solver run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SolverTranscript {
    pub command: String,
    /// -1 when the process ended by a signal.
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
    #[serde(rename = "wallTimeMs", serialize_with = "millis")]
    pub wall_time: Duration,
}

fn millis<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u64(d.as_millis() as u64)
}

struct Semaphore {
    permits: Mutex<usize>,
    freed: Condvar,
}

impl Semaphore {
    fn acquire(&self) -> Permit<'_> {
        let mut n = self.permits.lock().unwrap_or_else(|e| e.into_inner());
        while *n == 0 {
            n = self.freed.wait(n).unwrap_or_else(|e| e.into_inner());
        }
        *n -= 1;
        Permit(self)
    }
}

struct Permit<'a>(&'a Semaphore);

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.permits.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.freed.notify_one();
    }
}

static SOLVER_SLOTS: OnceLock<Semaphore> = OnceLock::new();

fn slots() -> &'static Semaphore {
    SOLVER_SLOTS.get_or_init(|| Semaphore {
        permits: Mutex::new(thread::available_parallelism().map_or(4, |n| n.get())),
        freed: Condvar::new(),
    })
}

/// Bounds simultaneous solver subprocesses. Takes effect only before the
/// first invocation; returns false afterwards.
pub fn set_max_concurrent_solvers(n: usize) -> bool {
    SOLVER_SLOTS
        .set(Semaphore {
            permits: Mutex::new(n.max(1)),
            freed: Condvar::new(),
        })
        .is_ok()
}

/// Arguments for `cfg`, ending with the program file.
pub fn solver_arguments(cfg: &RunConfiguration, program: &Path) -> Vec<String> {
    let mut args: Vec<String> = cfg.options.split_whitespace().map(str::to_string).collect();
    match cfg.solver_kind {
        SolverKind::Dlv if cfg.max_models > 0 => args.push(format!("-n={}", cfg.max_models)),
        SolverKind::Clingo => args.push(cfg.max_models.to_string()),
        _ => {}
    }
    args.push(program.display().to_string());
    args
}

fn drain(mut r: impl Read + Send + 'static) -> thread::JoinHandle<String> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = r.read_to_end(&mut buf);
        String::from_utf8_lossy(&buf).into_owned()
    })
}

fn wait_with_timeout(child: &mut Child, timeout: Duration) -> std::io::Result<Option<i32>> {
    let start = Instant::now();
    loop {
        if let Some(status) = child.try_wait()? {
            return Ok(Some(status.code().unwrap_or(-1)));
        }
        if start.elapsed() >= timeout {
            let _ = child.kill();
            let _ = child.wait();
            return Ok(None);
        }
        thread::sleep(Duration::from_millis(5));
    }
}

/// Runs the configured solver on the program stored at `program`.
pub(crate) fn run_on_file(cfg: &RunConfiguration, program: &Path) -> Result<SolverTranscript, AdapterError> {
    let exe = cfg
        .solver_path
        .as_ref()
        .ok_or_else(|| AdapterError::NoSolverPath(cfg.name.clone()))?;
    let args = solver_arguments(cfg, program);
    let command = std::iter::once(exe.display().to_string())
        .chain(args.iter().cloned())
        .collect::<Vec<_>>()
        .join(" ");

    let _permit = slots().acquire();
    let start = Instant::now();
    let mut child = Command::new(exe)
        .args(&args)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| AdapterError::ExecutableMissing {
            path: exe.clone(),
            reason: e.to_string(),
        })?;
    let out = drain(child.stdout.take().expect("piped stdout"));
    let err = drain(child.stderr.take().expect("piped stderr"));
    let status = wait_with_timeout(&mut child, Duration::from_secs(cfg.timeout_seconds))?;
    let wall_time = start.elapsed();
    let Some(exit_code) = status else {
        // grandchildren may still hold the pipes open; leave the readers detached
        return Err(AdapterError::Timeout {
            seconds: cfg.timeout_seconds,
            program_file: program.to_path_buf(),
        });
    };
    Ok(SolverTranscript {
        command,
        exit_code,
        stdout: out.join().unwrap_or_default(),
        stderr: err.join().unwrap_or_default(),
        wall_time,
    })
}

/// Writes `program_text` to a fresh temporary file. The file is deleted when
/// the guard drops unless it is kept with [`tempfile::NamedTempFile::keep`].
pub(crate) fn write_program(program_text: &str, kind: SolverKind) -> Result<tempfile::NamedTempFile, AdapterError> {
    let suffix = if kind == SolverKind::Clingo { ".lp" } else { ".dl" };
    let mut f = tempfile::Builder::new().prefix("aspunit-").suffix(suffix).tempfile()?;
    f.write_all(program_text.as_bytes())?;
    f.flush()?;
    Ok(f)
}

/// Keeps the temporary program file and points the error at it.
pub(crate) fn retain_on_error(file: tempfile::NamedTempFile, err: AdapterError) -> AdapterError {
    match file.keep() {
        Ok((_, path)) => err.with_program_file(path),
        Err(_) => err,
    }
}

/// Runs an external solver on `program_text`. On failure the temporary
/// program file is kept and named in the error.
pub fn invoke_solver(cfg: &RunConfiguration, program_text: &str) -> Result<SolverTranscript, AdapterError> {
    if cfg.solver_kind == SolverKind::Internal {
        return Err(AdapterError::NotExternal);
    }
    let file = write_program(program_text, cfg.solver_kind)?;
    match run_on_file(cfg, file.path()) {
        Ok(t) => Ok(t),
        Err(e) => Err(retain_on_error(file, e)),
    }
}
