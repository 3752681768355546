//! Acceptance suite: one PASS/FAIL line per criterion. Tolerances live in
//! `hypoisson_core::verify`. Set `HYPOISSON_ACCEPTANCE` to a comma list of
//! check ids to run a subset.

use hypoisson_core::verify::{run_check, SuiteOptions};
use std::process::ExitCode;

fn main() -> ExitCode {
    let only: Vec<u32> = std::env::var("HYPOISSON_ACCEPTANCE")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect())
        .unwrap_or_default();
    let opts = SuiteOptions::default();
    let mut failed = 0;
    for id in 1..=10u32 {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let c = run_check(id, &opts);
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!("{tag} [{:>2}] {}: {} ({:.1}s)", c.id, c.name, c.detail, c.seconds);
        if !c.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    } else {
        println!("all criteria passed");
        ExitCode::SUCCESS
    }
}
