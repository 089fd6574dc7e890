//! Monte Carlo E exp(t H(A)) against the quadrature target.
//!
//! cargo run --release --example laplace

use betaproc::construct::{Construction, StickBreakingConfig};
use betaproc::measure::{BaseMeasureSpec, Region};
use betaproc::rng::RngStream;
use betaproc::verify::{check_laplace_functional, laplace_target_exponent};

fn main() -> betaproc::Result<()> {
    let base = BaseMeasureSpec::unit(1.0, 1.0)?;
    let c = Construction::Stick(StickBreakingConfig::effectively_untruncated(base)?);
    let half = Region::new(0.0, 0.5)?;
    for (t, region) in [(-1.0, Region::everywhere()), (-3.0, half)] {
        let target = (-laplace_target_exponent(&c, t, &region)?).exp();
        let report = check_laplace_functional(&c, t, &region, 10_000, &RngStream::new(1, 0))?;
        println!(
            "t={t} on [{}, {}]: target {target:.6} estimate {:.6} ({:?})",
            region.lower,
            region.upper,
            report.estimate.unwrap_or(f64::NAN),
            report.verdict
        );
    }
    Ok(())
}
