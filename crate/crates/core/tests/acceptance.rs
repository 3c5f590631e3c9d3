//! Runs the full verification suite once and prints one line per criterion.
//! Exits nonzero if any criterion fails.

use std::process::ExitCode;

use gl2ext::calibration;
use gl2ext::verify::{self, VerifyOptions};

fn main() -> ExitCode {
    let record = match calibration::default_record() {
        Ok(r) => r,
        Err(e) => {
            println!("calibration FAIL: {e}");
            return ExitCode::FAILURE;
        }
    };
    println!(
        "calibration: {} of {} candidate conventions pass",
        record.passing, record.candidates
    );
    let report = verify::run(record, &VerifyOptions::default());
    let mut ok = report.calibration.is_consistent();
    for id in 1..=6u8 {
        match report.criteria.iter().find(|c| c.id == id) {
            Some(c) => {
                println!(
                    "criterion {id}: {} - {} ({} checks, {} ms)",
                    if c.passed { "pass" } else { "FAIL" },
                    c.title,
                    c.checks,
                    c.millis
                );
                for n in &c.notes {
                    println!("    note: {n}");
                }
                for f in &c.failures {
                    println!("    fail: {f}");
                }
                ok &= c.passed;
            }
            None => {
                println!("criterion {id}: FAIL - not run");
                ok = false;
            }
        }
    }
    println!("acceptance: {}", if ok { "pass" } else { "FAIL" });
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
