//! Draw one beta process with each construction and compare total mass.
//!
//! cargo run --example constructions

use betaproc::construct::{ArrayConfig, Construction, SieveConfig, StickBreakingConfig, StickVariant};
use betaproc::measure::BaseMeasureSpec;
use betaproc::rng::RngStream;

fn main() -> betaproc::Result<()> {
    let base = BaseMeasureSpec::unit(1.0, 2.0)?;
    let constructions = [
        ("stick", Construction::Stick(StickBreakingConfig::effectively_untruncated(base.clone())?)),
        (
            "gamma-exp",
            Construction::Stick(StickBreakingConfig::new(base.clone(), 30, StickVariant::GammaExponential)?),
        ),
        (
            "power-law",
            Construction::Stick(StickBreakingConfig::new(base.clone(), 30, StickVariant::PowerLaw { discount: 0.3 })?),
        ),
        ("sieve", Construction::Sieve(SieveConfig::new(base.clone(), 2000)?)),
        ("array", Construction::Array(ArrayConfig::new(base.clone(), 500, 30)?)),
        ("dp", Construction::Dp { base: base.clone(), groups: 40 }),
    ];

    let reps = 400;
    println!("{:<10} {:>8} {:>10}", "name", "atoms", "mean H(Θ)");
    for (k, (name, c)) in constructions.iter().enumerate() {
        let root = RngStream::new(11, k as u64);
        let mut atoms = 0;
        let mut mass = 0.0;
        for j in 0..reps {
            let h = c.sample(&mut root.derive(j))?;
            atoms += h.len();
            mass += h.total_mass();
        }
        println!("{name:<10} {:>8.1} {:>10.4}", atoms as f64 / reps as f64, mass / reps as f64);
    }
    // E H(Θ) = γ for the beta process; power-law mass converges slower in the
    // group count. The DP always has mass 1.
    Ok(())
}
