//! Run a verification suite and print the report.
//!
//! cargo run --release --example verify -- levy

use betaproc::verify::{run_suite, Suite, DEFAULT_SEED};

fn main() -> betaproc::Result<()> {
    let suite: Suite = std::env::args().nth(1).as_deref().unwrap_or("levy").parse()?;
    let report = run_suite(suite, DEFAULT_SEED)?;
    for t in &report.tests {
        println!("{:?} {} {:.3e} <= {:.3e}", t.verdict, t.test_name, t.statistic, t.threshold);
    }
    println!("{}/{} passed", report.n_tests - report.n_failed, report.n_tests);
    Ok(())
}
