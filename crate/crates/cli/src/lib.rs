//! Batch runner behind the `flowdet` binary: config parsing, experiments and
//! report writers.

pub mod args;
pub mod config;
pub mod experiments;
pub mod report;
pub mod sample;

use std::ffi::OsString;

use args::{parse_flags, sibling, ParseError};
use experiments::{run_experiment, RunError, RunOptions};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Parses `argv`, runs the experiment, writes the reports and returns the
/// process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let inv = match parse_flags(argv) {
        Ok(inv) => inv,
        Err(ParseError::Clap(e)) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
        Err(e) => {
            eprintln!("{e}");
            return EXIT_USAGE;
        }
    };
    let outcome = match run_experiment(
        &inv.config,
        &RunOptions {
            jobs: inv.jobs,
            timings: inv.timings,
        },
    ) {
        Ok(o) => o,
        Err(e @ RunError::Config(_)) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_FAIL;
        }
    };
    let path = inv.output_path();
    let mut written = vec![report::write_report(&outcome.rows, inv.config.format, &path)];
    if inv.config.experiment == config::Experiment::RationalFlowSweep {
        written.push(report::write_sweep(&outcome.sweep, &sibling(&path, "sweep.csv")));
    }
    if !outcome.determinants.is_empty() {
        written.push(report::write_json(
            &outcome.determinants,
            &sibling(&path, "determinant.json"),
        ));
    }
    if let Some(Err(e)) = written.into_iter().find(Result::is_err) {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    let failing = outcome.rows.iter().filter(|r| !r.pass).count();
    eprintln!(
        "{}: {} rows, {failing} failing -> {}",
        inv.config.experiment,
        outcome.rows.len(),
        path.display()
    );
    if failing == 0 {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}
