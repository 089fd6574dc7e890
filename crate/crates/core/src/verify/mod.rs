//! Statistical checks used by the test suites: two-sample KS, chi-square
//! goodness of fit for counts, Monte Carlo means against targets, and the
//! Laplace functional of a sampled beta process.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, DiscreteCDF, Poisson};

use crate::construct::{replicate, Construction};
use crate::error::{Error, Result};
use crate::levy::laplace_exponent;
use crate::measure::Region;
use crate::quad::{integrate, Tolerance};
use crate::rng::RngStream;

pub mod suites;

pub use suites::{run_suite, Suite, SuiteReport, DEFAULT_SEED};

/// Significance level used by all suites.
pub const DEFAULT_LEVEL: f64 = 0.01;

/// Standard errors allowed between a Monte Carlo mean and its target.
pub const DEFAULT_SE_MULTIPLE: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test_name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub n_samples: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stream: Option<u64>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub target_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tolerance: Option<f64>,
}

impl TestReport {
    /// Passes iff `statistic <= threshold`.
    pub fn new(name: impl Into<String>, statistic: f64, threshold: f64, n_samples: u64) -> Self {
        let verdict = if statistic <= threshold {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Self {
            test_name: name.into(),
            statistic,
            threshold,
            n_samples,
            seed: None,
            stream: None,
            verdict,
            target_value: None,
            estimate: None,
            tolerance: None,
        }
    }

    /// `|estimate - target| <= tolerance`.
    pub fn against_target(
        name: impl Into<String>,
        estimate: f64,
        target: f64,
        tolerance: f64,
        n_samples: u64,
    ) -> Self {
        let mut r = Self::new(name, (estimate - target).abs(), tolerance, n_samples);
        r.target_value = Some(target);
        r.estimate = Some(estimate);
        r.tolerance = Some(tolerance);
        r
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.test_name = name.into();
        self
    }

    pub fn with_rng(mut self, rng: &RngStream) -> Self {
        self.seed = Some(rng.seed());
        self.stream = Some(rng.stream_id());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }
}

fn nonempty(xs: &[f64], what: &'static str) -> Result<()> {
    if xs.is_empty() {
        Err(Error::EmptySample(what))
    } else {
        Ok(())
    }
}

/// Largest gap between the two empirical CDFs.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    nonempty(a, "first sample")?;
    nonempty(b, "second sample")?;
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    for v in x.iter().chain(&y) {
        if v.is_nan() {
            return Err(Error::Domain { what: "sample value", value: *v });
        }
    }
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (m, n) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / m - j as f64 / n).abs());
    }
    Ok(d)
}

/// Asymptotic critical value `sqrt(-ln(level / 2) / 2) sqrt((m + n) / (m n))`.
pub fn ks_critical_value(m: usize, n: usize, level: f64) -> f64 {
    let (m, n) = (m as f64, n as f64);
    (-(level / 2.0).ln() / 2.0).sqrt() * ((m + n) / (m * n)).sqrt()
}

pub fn ks_two_sample(a: &[f64], b: &[f64], level: f64) -> Result<TestReport> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::param("level", level, "must be in (0, 1)"));
    }
    let d = ks_statistic(a, b)?;
    Ok(TestReport::new(
        "ks_two_sample",
        d,
        ks_critical_value(a.len(), b.len(), level),
        (a.len() + b.len()) as u64,
    ))
}

/// Pearson chi-square of `observed` counts against category probabilities
/// `probs`, whose last entry should carry the remaining tail mass. Adjacent
/// categories are pooled left to right until each has expected count
/// `>= 5`; a short final bin is merged into its neighbour.
pub fn chi_square_gof(observed: &[u64], probs: &[f64], level: f64) -> Result<TestReport> {
    if observed.len() != probs.len() || observed.is_empty() {
        return Err(Error::param(
            "probs",
            probs.len() as f64,
            "need one probability per observed category",
        ));
    }
    let total: u64 = observed.iter().sum();
    if total == 0 {
        return Err(Error::EmptySample("chi-square counts"));
    }
    let n = total as f64;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&c, &p) in observed.iter().zip(probs) {
        o += c as f64;
        e += p * n;
        if e >= 5.0 {
            bins.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => bins.push((o, e)),
        }
    }
    if bins.len() < 2 {
        return Err(Error::param(
            "n_samples",
            n,
            "too few samples for two bins with expected count >= 5",
        ));
    }
    let stat: f64 = bins.iter().map(|&(o, e)| (o - e).powi(2) / e).sum();
    let df = (bins.len() - 1) as f64;
    let crit = ChiSquared::new(df)
        .map_err(|_| Error::param("df", df, "invalid degrees of freedom"))?
        .inverse_cdf(1.0 - level);
    Ok(TestReport::new("chi_square_gof", stat, crit, total))
}

/// Chi-square test of integer samples against `Pois(mean)` at level 0.01.
pub fn check_poisson_counts(samples: &[u64], mean: f64) -> Result<TestReport> {
    let pois = Poisson::new(mean).map_err(|_| Error::param("mean", mean, "must be positive"))?;
    if samples.is_empty() {
        return Err(Error::EmptySample("poisson counts"));
    }
    // Categories 0..=k_max, the last one holding the upper tail.
    let k_max = samples.iter().copied().max().unwrap_or(0);
    let mut observed = vec![0u64; k_max as usize + 1];
    for &s in samples {
        observed[s as usize] += 1;
    }
    let mut probs: Vec<f64> = (0..k_max).map(|k| pois.pmf(k)).collect();
    probs.push(if k_max == 0 { 1.0 } else { pois.sf(k_max - 1) });
    let mut r = chi_square_gof(&observed, &probs, DEFAULT_LEVEL)?.named("poisson_counts");
    r.target_value = Some(mean);
    r.estimate = Some(samples.iter().sum::<u64>() as f64 / samples.len() as f64);
    Ok(r)
}

/// Mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> Result<(f64, f64)> {
    nonempty(xs, "mean")?;
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return Ok((mean, f64::INFINITY));
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

/// Monte Carlo mean within `se_multiple` standard errors of `target`.
pub fn check_mean(xs: &[f64], target: f64, se_multiple: f64) -> Result<TestReport> {
    let (mean, se) = mean_se(xs)?;
    Ok(TestReport::against_target("mean", mean, target, se_multiple * se, xs.len() as u64))
}

/// `-ln E exp(t H(A))`: `int_A mu(d theta) int (1 - e^(t p)) nu_theta(dp)`.
pub fn laplace_target_exponent(construction: &Construction, t: f64, region: &Region) -> Result<f64> {
    let base = construction.base();
    let (mass, a, b) = base.region_span(region)?;
    if mass == 0.0 {
        return Ok(0.0);
    }
    match base.concentration().as_constant() {
        Some(alpha) => Ok(mass * laplace_exponent(alpha, t)?.value),
        None => {
            let per_theta = |theta: f64| {
                base.concentration()
                    .at(theta)
                    .and_then(|alpha| laplace_exponent(alpha, t))
                    .map_or(f64::NAN, |e| e.value)
            };
            let avg = integrate(per_theta, a, b, Tolerance::new(1e-12, 1e-10))?.value / (b - a);
            Ok(mass * avg)
        }
    }
}

/// Empirical `E exp(t H(A))` over `n_reps` replicates against the exact
/// Laplace functional, within four standard errors.
pub fn check_laplace_functional(
    construction: &Construction,
    t: f64,
    region: &Region,
    n_reps: usize,
    rng: &RngStream,
) -> Result<TestReport> {
    if !(t < 0.0) {
        return Err(Error::param("t", t, "must be negative"));
    }
    let target = (-laplace_target_exponent(construction, t, region)?).exp();
    let xs = replicate(n_reps, rng, |r| construction.sample(r), |m| {
        (t * m.measure_total(|theta| region.contains(theta))).exp()
    })?;
    Ok(check_mean(&xs, target, DEFAULT_SE_MULTIPLE)?
        .named("laplace_functional")
        .with_rng(rng))
}
