//! Acceptance suite: one pass/fail line per criterion, non-zero exit if
//! any criterion fails.

use cameral_core::verify::{run_all, VerifyConfig};

fn main() {
    let reports = run_all(&VerifyConfig::default());
    for r in &reports {
        println!("{}", r.summary_line());
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!("acceptance: {} of {} criteria passed", reports.len() - failed, reports.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
