//! Posterior draws given a small Bernoulli feature matrix.
//!
//! cargo run --example posterior

use betaproc::likelihood::{FeatureMatrix, LikelihoodKind};
use betaproc::measure::BaseMeasureSpec;
use betaproc::posterior::{sample_posterior_any, PosteriorSpec};
use betaproc::rng::RngStream;

fn main() -> betaproc::Result<()> {
    // 4 customers, 3 dishes
    let x = FeatureMatrix::from_triplets(
        4,
        LikelihoodKind::Bernoulli,
        vec![0.2, 0.5, 0.8],
        [(0, 0, 1), (1, 0, 1), (2, 0, 1), (3, 0, 1), (0, 1, 1), (2, 2, 1), (3, 2, 1)],
    )?;
    let alpha = 2.0;
    let spec = PosteriorSpec::from_matrix(BaseMeasureSpec::unit(alpha, 1.0)?, &x)?;
    let root = RngStream::new(17, 0);
    let n = 5000;
    let mut sums = [0.0; 3];
    let mut fresh = 0.0;
    for k in 0..n {
        let d = sample_posterior_any(&spec, &mut root.derive(k))?;
        for (s, a) in sums.iter_mut().zip(&d.observed_atoms) {
            *s += a.weight;
        }
        fresh += d.unobserved_part.total_mass();
    }
    for (j, s) in sums.iter().enumerate() {
        let m1 = spec.stats.m1[j] as f64;
        println!(
            "atom {}: mean weight {:.4}  Beta({m1}, {}) mean {:.4}",
            spec.stats.atoms[j],
            s / n as f64,
            alpha + 4.0 - m1,
            m1 / (alpha + 4.0)
        );
    }
    println!("unobserved mass {:.4}  target {:.4}", fresh / n as f64, alpha / (alpha + 4.0));
    Ok(())
}
