//! Acceptance suite: runs every criterion at its stated tolerance and
//! prints one PASS/FAIL line per criterion, with the individual checks of
//! failing criteria underneath.
//!
//! Pass criterion numbers as arguments to run a subset:
//! `cargo test --test acceptance -- 2 3`.

use std::process::ExitCode;

use dicke_ed::acceptance::run_criterion;

fn main() -> ExitCode {
    let selected: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let ids: Vec<u8> = if selected.is_empty() { (1..=10).collect() } else { selected };
    let mut failed = Vec::new();
    for id in &ids {
        let Some(report) = run_criterion(*id) else {
            eprintln!("no criterion {id}");
            return ExitCode::from(2);
        };
        if report.passed() {
            println!("{}", report.summary());
        } else {
            print!("{report}");
            failed.push(*id);
        }
    }
    println!("\nacceptance: {} of {} criteria passed", ids.len() - failed.len(), ids.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failing: {failed:?}");
        ExitCode::FAILURE
    }
}
