//! Bernoulli process draws over a beta process: an Indian buffet matrix.
//!
//! cargo run --example ibp_features

use betaproc::construct::StickBreakingConfig;
use betaproc::construct::sample_bp_stick_breaking;
use betaproc::likelihood::{count_stats, sample_bernoulli_process, sample_negbin_process};
use betaproc::measure::BaseMeasureSpec;
use betaproc::rng::RngStream;

fn main() -> betaproc::Result<()> {
    let base = BaseMeasureSpec::unit(1.0, 3.0)?;
    let cfg = StickBreakingConfig::effectively_untruncated(base)?;
    let mut rng = RngStream::new(5, 0);
    let h = sample_bp_stick_breaking(&cfg, &mut rng)?;

    let x = sample_bernoulli_process(&h, 8, &mut rng)?;
    println!("{} atoms in H, {} used by 8 customers", h.len(), x.active_columns());
    for row in 0..x.n() {
        let line: String = (0..x.n_atoms())
            .filter(|&j| count_stats(&x).m1[j] > 0)
            .map(|j| if x.get(row, j) > 0 { '#' } else { '.' })
            .collect();
        println!("  {line}");
    }
    let mut csv = Vec::new();
    x.write_csv(&mut csv)?;
    println!("csv is {} bytes", csv.len());

    let y = sample_negbin_process(&h, 8, 2.0, &mut rng)?;
    println!("negbin(r=2) total count {}", y.total());
    Ok(())
}
