//! Command-line front end for `liftlab`: configs, runners and reports.

pub mod commands;
pub mod config;
pub mod potential;
pub mod report;

use std::time::Instant;

use liftlab::Error;
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::report::{write_outputs, RunReport};

/// Exit code for invalid configs and failed preconditions.
pub const EXIT_CONFIG: u8 = 1;
/// Exit code when a numerical method did not converge.
pub const EXIT_NOT_CONVERGED: u8 = 2;
/// Exit code when a proven inequality fails on computed numbers.
pub const EXIT_VIOLATION: u8 = 3;

/// Exit code for a core error.
pub fn error_exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter { .. } | Error::IrrationalBranch(_) | Error::NotADistribution(_) => EXIT_CONFIG,
        _ => EXIT_NOT_CONVERGED,
    }
}

/// Validate, run and write one experiment. Returns the process exit code.
///
/// The report goes to stdout unless the config names an output path.
/// Diagnostics go to stderr.
pub fn execute(config: &ExperimentConfig, timings: bool) -> u8 {
    let plan = match config.validate() {
        Ok(plan) => plan,
        Err(violations) => {
            eprintln!("error: {} violation(s):", violations.len());
            for v in &violations {
                eprintln!("  - {v}");
            }
            return EXIT_CONFIG;
        }
    };
    if let Some(n) = config.threads {
        // Fails only if a pool already exists, e.g. when called twice in one process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let seed = config.seed.unwrap_or(0);
    let start = Instant::now();
    let outcome = match commands::run(&plan, seed) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return error_exit_code(&e);
        }
    };
    let command = config.command.map_or("", |c| c.as_str());
    let mut report = RunReport::new(command, seed, config.clone(), &outcome);
    if timings {
        report.timings = Some(json!({ "wall_seconds": start.elapsed().as_secs_f64() }));
    }
    match write_outputs(&mut report, &outcome, config.out.as_deref()) {
        Ok(text) => {
            if config.out.is_none() {
                print!("{text}");
            }
        }
        Err(e) => {
            eprintln!("error: cannot write outputs: {e}");
            return EXIT_CONFIG;
        }
    }
    for c in outcome.checks.iter().filter(|c| !c.passed) {
        eprintln!("violation: {}: {}", c.name, c.detail);
    }
    if !outcome.converged {
        eprintln!("warning: a truncation gate failed; results are not converged");
    }
    outcome.status().exit_code()
}
