//! Suite runner and report rendering behind the `aspunit` command.

pub mod report;
pub mod runner;

pub use report::{render_report, Format};
pub use runner::{check_suite, run_suite, solve, RunOptions, TestReport};
