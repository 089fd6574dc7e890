//! Beta(1, b) via the stick-breaking representation, against the usual sampler.
//!
//! cargo run --example stick_broken_beta

use betaproc::rng::RngStream;
use betaproc::rv::{beta, sample_stick_broken_beta, sample_stick_product, StickBrokenBetaConfig};

fn main() -> betaproc::Result<()> {
    let (a, b) = (2.0, 3.0);
    let cfg = StickBrokenBetaConfig::with_default_truncation(a, b)?;
    let mut rng = RngStream::new(3, 0);
    let n = 20_000;
    let stick: Vec<f64> = (0..n).map(|_| sample_stick_broken_beta(&cfg, &mut rng)).collect();
    let direct: Vec<f64> = (0..n).map(|_| beta(a, b, &mut rng)).collect::<Result<_, _>>()?;
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    println!("target mean       {:.4}", a / (a + b));
    println!("stick-broken mean {:.4}", mean(&stick));
    println!("direct mean       {:.4}", mean(&direct));

    // product of r sticks has mean (alpha/(1+alpha))^r
    let alpha = 1.5;
    for r in 1..=4 {
        let xs: Vec<f64> = (0..n).map(|_| sample_stick_product(r, alpha, &mut rng)).collect::<Result<_, _>>()?;
        println!("r={r}: mean {:.4}  target {:.4}", mean(&xs), (alpha / (1.0 + alpha)).powi(r as i32));
    }
    Ok(())
}
