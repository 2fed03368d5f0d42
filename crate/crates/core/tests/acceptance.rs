//! One PASS/FAIL line per acceptance criterion, with runtimes.

use std::process::ExitCode;

use amenable_gibbs::acceptance::run_suite;

fn main() -> ExitCode {
    let outcomes = run_suite(0);
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!(
        "acceptance: {} passed, {failed} failed",
        outcomes.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
