// SPDX-License-Identifier: Apache-2.0

//! `hodet`: run a scenario and write CSV + JSON outputs.
//!
//! Exit codes: 0 success, 1 I/O, 2 config or argument error, 3 symplectic
//! drift ceiling exceeded, 4 mode convergence not reached, 5 thermality
//! check failed, 6 integrator failure, 7 unphysical state.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use hodet::config::ScenarioKind;
use hodet::runner::{self, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "hodet", version, about = "Oscillator detectors in a cavity, evolved as Gaussian states")]
struct Args {
    /// switching_noise, causality, unruh, harvesting or cross_validation.
    #[arg(long)]
    scenario: Option<ScenarioKind>,

    /// Scenario config; defaults to the checked-in file for --scenario.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Mode-count schedule, comma separated. A single value runs once at
    /// that N without a convergence check.
    #[arg(long, value_delimiter = ',')]
    modes: Option<Vec<usize>>,

    /// Convergence tolerance.
    #[arg(long)]
    tolerance: Option<f64>,

    /// Explicit sweep values, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    sweep: Option<Vec<f64>>,

    /// Seed for the randomized cross-validation suite.
    #[arg(long)]
    seed: Option<u64>,

    /// Resolve the config and print the mode and step report only.
    #[arg(long)]
    validate_only: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let manifest = RunManifest {
        scenario: args.scenario,
        config: args.config,
        out: args.out,
        modes: args.modes,
        tolerance: args.tolerance,
        sweep: args.sweep,
        seed: args.seed,
    };

    if args.validate_only {
        return match runner::validate(&manifest) {
            Ok(report) => {
                print!("{report}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        };
    }

    match runner::run(&manifest) {
        Ok(outcome) => {
            for r in &outcome.results {
                println!("{} [{}] N={} wall={:.1}s", r.scenario, r.label, r.metadata.modes, r.metadata.wall_time);
                for (k, v) in &r.metadata.summary {
                    println!("  {k} = {v:.6e}");
                }
                for f in &r.metadata.flags {
                    eprintln!("  flag: {}", f.message);
                }
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => fail(&e),
    }
}

fn fail(e: &hodet::Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}
