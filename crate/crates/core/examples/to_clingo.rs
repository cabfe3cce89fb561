//! Prints a DLV-syntax program in clingo syntax.
//!
//! Used by `fixtures/transcripts/record.sh` to prepare programs for
//! recording clingo transcripts.

use std::process::ExitCode;

use aspunit_core::parser::{parse_program, serialize_program_as, Dialect};

fn main() -> ExitCode {
    let Some(path) = std::env::args().nth(1) else {
        eprintln!("usage: to_clingo <program.dl>");
        return ExitCode::from(2);
    };
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{path}: {e}");
            return ExitCode::from(2);
        }
    };
    match parse_program(&text, &path) {
        Ok(p) => {
            print!("{}", serialize_program_as(&p.value, Dialect::Clingo));
            ExitCode::SUCCESS
        }
        Err(d) => {
            eprintln!("{d}");
            ExitCode::from(2)
        }
    }
}
