//! Runs every criterion of the full suite and prints one PASS/FAIL line per
//! criterion, followed by its individual checks. Exits nonzero on any
//! failure. `MMWB_ACCEPTANCE_SEED` overrides the default seed 0.

use std::process::ExitCode;

use mmwb_cli::verify::{verify, Level, VerifyOptions};

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let seed = std::env::var("MMWB_ACCEPTANCE_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);
    println!("\nrunning acceptance criteria (full, seed {seed})");
    let report = verify(&VerifyOptions::new(Level::Full, seed), |c| {
        println!("{}", c.line());
        for l in c.check_lines() {
            println!("{l}");
        }
    });
    let failed: Vec<&str> = report
        .criteria
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.id.as_str())
        .collect();
    println!(
        "\nacceptance result: {} passed; {} failed{}\n",
        report.criteria.len() - failed.len(),
        failed.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!(" (criteria {})", failed.join(", "))
        }
    );
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
