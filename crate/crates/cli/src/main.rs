use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use aspunit_cli::report::{render_report, Format};
use aspunit_cli::runner::{check_suite, run_suite, solve, RunOptions};
use aspunit_core::adapter::{resolve_configuration, CliOverrides, ConfigFile, SolverKind};
use aspunit_core::parser::parse_program;
use aspunit_core::testlang::TestSuite;

#[derive(Parser)]
#[command(name = "aspunit", version, about = "Unit tests for answer set programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a test suite and report the outcome of every assertion.
    Run {
        suite: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
        #[arg(long, default_value = "text")]
        format: Format,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Test cases run concurrently (default: number of processors).
        #[arg(long)]
        jobs: Option<usize>,
        /// Resolve relative input paths against this directory.
        #[arg(long)]
        base_dir: Option<PathBuf>,
    },
    /// Parse and validate a suite without solving.
    Check {
        suite: PathBuf,
        #[arg(long)]
        base_dir: Option<PathBuf>,
    },
    /// Print the answer sets of a single program.
    Solve {
        program: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
    },
}

#[derive(Args)]
struct SolverFlags {
    /// Configuration file (default: aspunit.config.json if present).
    #[arg(long)]
    config: Option<PathBuf>,
    /// internal, dlv or clingo.
    #[arg(long)]
    solver: Option<SolverKind>,
    #[arg(long)]
    solver_path: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    options: Option<String>,
    /// Stop after this many answer sets (0: all).
    #[arg(long)]
    max_models: Option<usize>,
    #[arg(long)]
    timeout: Option<u64>,
}

impl SolverFlags {
    fn overrides(&self) -> CliOverrides {
        CliOverrides {
            solver: self.solver,
            solver_path: self.solver_path.clone(),
            options: self.options.clone(),
            max_models: self.max_models,
            timeout_seconds: self.timeout,
        }
    }
}

fn exit(code: i32) -> ExitCode {
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            suite,
            solver,
            format,
            out,
            jobs,
            base_dir,
        } => {
            let opts = RunOptions {
                config_path: solver.config.clone(),
                overrides: solver.overrides(),
                jobs,
                base_dir,
            };
            let report = run_suite(&suite, &opts);
            let doc = render_report(&report, format);
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, doc) {
                        eprintln!("aspunit: cannot write {}: {e}", path.display());
                        return exit(2);
                    }
                    eprintln!("{}", aspunit_cli::report::summary_line(&report));
                }
                None => print!("{doc}"),
            }
            exit(report.exit_code())
        }
        Command::Check { suite, base_dir } => {
            let outcome = check_suite(&suite, base_dir.as_deref());
            for d in &outcome.diagnostics {
                eprintln!("{d}");
            }
            if outcome.exit_code() == 0 {
                println!("{}: ok", suite.display());
            }
            exit(outcome.exit_code())
        }
        Command::Solve { program, solver } => solve_one(&program, &solver),
    }
}

fn solve_one(path: &PathBuf, flags: &SolverFlags) -> ExitCode {
    let origin = path.display().to_string();
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("aspunit: cannot read {origin}: {e}");
            return exit(2);
        }
    };
    let program = match parse_program(&text, &origin) {
        Ok(p) => p.value,
        Err(d) => {
            eprintln!("{d}");
            return exit(2);
        }
    };
    let config = match &flags.config {
        Some(p) => match ConfigFile::load(p) {
            Ok(c) => Some(c),
            Err(e) => {
                eprintln!("aspunit: {e}");
                return exit(2);
            }
        },
        None => None,
    };
    let suite = TestSuite::default();
    let cfg = match resolve_configuration(&suite, None, config.as_ref(), &flags.overrides()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("aspunit: {e}");
            return exit(2);
        }
    };
    match solve(&cfg, &program) {
        Ok((result, _)) => {
            for (i, a) in result.answer_sets.iter().enumerate() {
                match &result.cost_vectors[i] {
                    Some(c) => println!("{a} cost {c}"),
                    None => println!("{a}"),
                }
            }
            if !result.complete {
                println!("(stopped after {} answer sets)", result.len());
            }
            if let Some(best) = &result.best_cost {
                println!("best cost {best}");
            }
            exit(0)
        }
        Err(e) => {
            eprintln!("aspunit: {e}");
            exit(2)
        }
    }
}
