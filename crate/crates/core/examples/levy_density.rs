//! Per-group Lévy densities and their sum.
//!
//! cargo run --example levy_density

use betaproc::levy::{integrate_group_density, levy_density_fi, levy_total_density, LevyDensityParams};

fn main() -> betaproc::Result<()> {
    let alpha = 2.0;
    println!("{:>6} {:>14} {:>14} {:>10}", "pi", "sum f_i", "target", "rel err");
    for &pi in &[1e-4, 0.01, 0.1, 0.5, 0.9, 0.999] {
        let mut sum = 0.0;
        for i in 1..=200 {
            let f = levy_density_fi(pi, LevyDensityParams::new(alpha, i)?)?;
            sum += f;
            if f < 1e-16 * sum {
                break;
            }
        }
        let target = levy_total_density(pi, alpha)?;
        println!("{pi:>6} {sum:>14.6e} {target:>14.6e} {:>10.2e}", (sum / target - 1.0).abs());
    }

    println!("\ngroup means, alpha = {alpha}");
    for i in 1..=5 {
        let p = LevyDensityParams::new(alpha, i)?;
        let m = integrate_group_density(p, |pi| pi)?;
        println!("i={i}: {:.10}  target {:.10}", m.value, (alpha / (1.0 + alpha)).powi(i as i32) / alpha);
    }
    Ok(())
}
