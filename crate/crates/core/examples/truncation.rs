//! Exact truncation error against the analytic bound.
//!
//! cargo run --example truncation

use betaproc::levy::{simple_function_sweep, SimpleFunctionGrid, TruncationProblem, TruncationSweep};

fn main() -> betaproc::Result<()> {
    let problem = TruncationProblem::bernoulli(1.0, 1.0, 5)?;
    let adaptive = TruncationSweep::adaptive(&problem, 8)?.incremental(8)?;
    let lower = simple_function_sweep(&problem, 8, SimpleFunctionGrid::new(500)?)?;
    println!("{:>2} {:>12} {:>12} {:>12}", "R", "exact", "lower(500)", "bound");
    for (a, s) in adaptive.iter().zip(&lower) {
        println!(
            "{:>2} {:>12.6e} {:>12.6e} {:>12.6e}",
            a.truncation,
            a.exact_pe,
            s.exact_pe,
            a.analytic_bound.unwrap_or(f64::NAN)
        );
    }
    // negative binomial likelihoods: larger r touches the tail more often
    for r in [0.5, 1.0, 2.0, 4.0] {
        let p = TruncationProblem::new(1.0, 1.0, 5, r)?;
        let rep = TruncationSweep::adaptive(&p, 4)?.from_scratch(4)?;
        println!("negbin r={r}: P(E) at R=4 = {:.6e}", rep.exact_pe);
    }
    Ok(())
}
