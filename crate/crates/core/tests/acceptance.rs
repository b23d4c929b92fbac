//! Full acceptance suite. Runs without the libtest harness so every
//! criterion prints its pass/fail line, and one after another so the time
//! limits are measured without competition for cores.

use std::io::Write;
use std::process::ExitCode;

use glassydicke::acceptance::run_one;

fn main() -> ExitCode {
    let mut failed = Vec::new();
    for id in 1..=8 {
        let report = run_one(id, false).expect("criterion exists");
        println!("{report}");
        let _ = std::io::stdout().flush();
        if !report.passed {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 8 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
