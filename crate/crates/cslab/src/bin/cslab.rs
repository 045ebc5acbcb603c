//! Command-line surface of the laboratory. The library's examples/ are the
//! richer entry point; this binary only drives whole scenarios from JSON
//! configs and prints the multiplier-profile verification.
//!
//! Thread count is controlled through `RAYON_NUM_THREADS` only.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cslab::config::parse_config;
use cslab::experiments::{list_scenarios, run_scenario};
use cslab::report::write_report;
use cslab::test_functions::{build_phi_default, build_phi_general, verify_properties};

#[derive(Parser)]
#[command(name = "cslab", version, about = "Numerical laboratory for conformally invariant Schrödinger equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a JSON config and write its reports.
    Run {
        /// Path to the JSON run configuration.
        #[arg(long)]
        config: PathBuf,
        /// Output directory for the JSON summary and CSV sweeps.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the radial multiplier profile for dimension n and verify its
    /// properties.
    VerifyPhi {
        #[arg(long)]
        n: usize,
        /// Source parameter eta (defaults to the admissible midpoint).
        #[arg(long)]
        eta: Option<f64>,
    },
    /// List the available scenarios.
    ListScenarios,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> cslab::Result<ExitCode> {
    match cli.command {
        Command::Run { config, out } => {
            let document = std::fs::read_to_string(&config).map_err(|e| cslab::Error::Io {
                path: config.clone(),
                source: e,
            })?;
            let mut parsed = parse_config(&document)?;
            if let Some(out) = out {
                parsed.output_dir = Some(out);
            }
            let report = run_scenario(&parsed)?;
            for assertion in &report.assertions {
                println!(
                    "[{}] {}: measured {:e} vs {:e}{}",
                    if assertion.passed { "pass" } else { "FAIL" },
                    assertion.name,
                    assertion.measured,
                    assertion.threshold,
                    if assertion.detail.is_empty() {
                        String::new()
                    } else {
                        format!(" ({})", assertion.detail)
                    }
                );
            }
            if !report.validity.valid {
                for reason in &report.validity.reasons {
                    println!("[invalid] {reason}");
                }
            }
            if let Some(dir) = &parsed.output_dir {
                let files = write_report(&report, dir)?;
                for file in files {
                    println!("wrote {}", file.display());
                }
            }
            Ok(ExitCode::from(report.exit_code() as u8))
        }
        Command::VerifyPhi { n, eta } => {
            let profile = match (n, eta) {
                (3, None) => build_phi_default(3)?,
                (3, Some(_)) => {
                    return Err(cslab::Error::parameter(
                        "eta",
                        "the n = 3 construction has eta = 0 built in",
                    ))
                }
                (_, None) => build_phi_default(n)?,
                (_, Some(eta)) => build_phi_general(n, eta)?,
            };
            let radii: Vec<f64> = (1..=70).map(|i| 0.05 * 1.13_f64.powi(i)).collect();
            let report = verify_properties(&profile, &radii);
            println!("profile n = {n}, lambda = {}", profile.lambda());
            for check in &report.checks {
                println!(
                    "[{}] {}: {}",
                    if check.passed { "pass" } else { "FAIL" },
                    check.name,
                    check.detail
                );
            }
            Ok(ExitCode::from(if report.all_passed { 0 } else { 1 }))
        }
        Command::ListScenarios => {
            for (name, blurb) in list_scenarios() {
                println!("{:<22} {}", name.as_str(), blurb);
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
