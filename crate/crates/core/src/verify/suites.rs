//! Named verification suites. Each check draws from its own stream of the
//! suite seed, so a report can be reproduced from `(suite, seed)` alone.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    check_laplace_functional, check_mean, check_poisson_counts, ks_two_sample, TestReport,
    DEFAULT_LEVEL, DEFAULT_SE_MULTIPLE,
};
use crate::construct::{
    replicate, ArrayConfig, Construction, SieveConfig, StickBreakingConfig, StickVariant,
};
use crate::error::{Error, Result};
use crate::levy::{
    expected_missing_mass, integrate_group_density, integrate_tail_density, levy_tail_density,
    levy_total_density, simple_function_sweep, truncation_bound_analytic, truncation_error_exact,
    LevyDensityParams, LevyTail, Method, SimpleFunctionGrid, TruncationProblem, TruncationSweep,
};
use crate::likelihood::{count_stats, sample_bernoulli_process, FeatureMatrix, LikelihoodKind};
use crate::measure::{BaseMeasureSpec, DiscreteMeasure, Region};
use crate::posterior::{sample_posterior_any, PosteriorSpec};
use crate::rng::RngStream;
use crate::rv;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Constructions,
    Levy,
    Truncation,
    Posterior,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 5] = ["constructions", "levy", "truncation", "posterior", "all"];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Constructions => "constructions",
            Suite::Levy => "levy",
            Suite::Truncation => "truncation",
            Suite::Posterior => "posterior",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constructions" => Ok(Suite::Constructions),
            "levy" => Ok(Suite::Levy),
            "truncation" => Ok(Suite::Truncation),
            "posterior" => Ok(Suite::Posterior),
            "all" => Ok(Suite::All),
            _ => Err(Error::Unknown {
                kind: "suite",
                name: s.to_string(),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub passed: bool,
    pub n_tests: usize,
    pub n_failed: usize,
    pub tests: Vec<TestReport>,
}

impl SuiteReport {
    fn new(suite: Suite, seed: u64, tests: Vec<TestReport>) -> Self {
        let n_failed = tests.iter().filter(|t| !t.passed()).count();
        Self {
            suite,
            seed,
            passed: n_failed == 0,
            n_tests: tests.len(),
            n_failed,
            tests,
        }
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<SuiteReport> {
    let mut tests = Vec::new();
    let wanted = |s: Suite| suite == s || suite == Suite::All;
    if wanted(Suite::Levy) {
        tests.push(levy_density_identity()?);
        tests.extend(group_moments()?);
        tests.push(missing_mass_quadrature()?);
    }
    if wanted(Suite::Truncation) {
        tests.extend(truncation_closed_forms()?);
        tests.push(truncation_monte_carlo(seed)?);
        tests.push(truncation_monotone_in_r()?);
        tests.extend(truncation_sweep_consistency()?);
        tests.push(simple_function_lower_convergence()?);
    }
    if wanted(Suite::Constructions) {
        tests.push(laplace_functional(seed)?);
        tests.extend(construction_equivalence(seed)?);
        tests.push(atom_count_poisson(seed)?);
        tests.push(first_customer_poisson(seed)?);
        tests.extend(distributional_identities(seed)?);
    }
    if wanted(Suite::Posterior) {
        tests.extend(posterior_conjugacy(seed)?);
        tests.push(posterior_mean(seed)?);
        tests.extend(geweke(seed)?);
    }
    Ok(SuiteReport::new(suite, seed, tests))
}

fn unit(alpha: f64, gamma: f64) -> Result<BaseMeasureSpec> {
    BaseMeasureSpec::unit(alpha, gamma)
}

fn stick(alpha: f64, gamma: f64) -> Result<StickBreakingConfig> {
    StickBreakingConfig::effectively_untruncated(unit(alpha, gamma)?)
}

fn ks(name: &str, a: &[f64], b: &[f64], rng: &RngStream) -> Result<TestReport> {
    Ok(ks_two_sample(a, b, DEFAULT_LEVEL)?.named(name).with_rng(rng))
}

/// 1000 points, half log-spaced and half evenly spaced, in `[1e-6, 1 - 1e-6]`.
pub fn identity_grid() -> Vec<f64> {
    (0..1000)
        .map(|k| {
            let u = f64::from(k) / 999.0;
            let p = if k % 2 == 0 {
                1e-6f64.powf(1.0 - u)
            } else {
                1e-6 + (1.0 - 2e-6) * u
            };
            p.clamp(1e-6, 1.0 - 1e-6)
        })
        .collect()
}

/// Worst relative gap between the summed group densities and the beta
/// process Lévy density.
pub fn levy_density_identity() -> Result<TestReport> {
    let grid = identity_grid();
    let mut worst: f64 = 0.0;
    for alpha in [0.5, 1.0, 2.0, 5.0] {
        let tail = LevyTail::new(alpha, 1.0, 0, 1.0)?;
        for &p in &grid {
            let total = levy_total_density(p, alpha)?;
            let sum = levy_tail_density(p, &tail)?;
            worst = worst.max(((sum - total) / total).abs());
        }
    }
    Ok(TestReport::new("levy_density_identity", worst, 1e-6, 4 * grid.len() as u64))
}

/// `int f_i = 1` and `int p f_i = alpha^-1 (alpha / (1 + alpha))^i`.
pub fn group_moments() -> Result<Vec<TestReport>> {
    let (mut mass, mut mean): (f64, f64) = (0.0, 0.0);
    let mut count = 0;
    for alpha in [0.5, 1.0, 2.0] {
        for i in 1..=10 {
            let params = LevyDensityParams::new(alpha, i)?;
            let m0 = integrate_group_density(params, |_| 1.0)?.value;
            let m1 = integrate_group_density(params, |p| p)?.value;
            mass = mass.max((m0 - 1.0).abs());
            mean = mean.max((m1 - (alpha / (1.0 + alpha)).powi(i as i32) / alpha).abs());
            count += 1;
        }
    }
    Ok(vec![
        TestReport::new("group_density_mass", mass, 1e-8, count),
        TestReport::new("group_density_mean", mean, 1e-8, count),
    ])
}

/// `gamma int p sum_{i > 2} f_i(p) dp` at `alpha = 2` against `(2/3)^2`.
pub fn missing_mass_quadrature() -> Result<TestReport> {
    let tail = LevyTail::new(2.0, 1.0, 2, 1.0)?;
    let q = integrate_tail_density(&tail, |p| p)?.value;
    Ok(TestReport::against_target(
        "missing_mass_quadrature",
        q,
        expected_missing_mass(2.0, 1.0, 2)?,
        1e-6,
        1,
    ))
}

pub fn truncation_closed_forms() -> Result<Vec<TestReport>> {
    let pb = TruncationProblem::bernoulli(1.0, 1.0, 1)?;
    let rep = truncation_error_exact(&pb, 1, Method::Adaptive)?;
    let bound = rep.analytic_bound.unwrap_or(f64::NAN);
    Ok(vec![
        TestReport::against_target(
            "truncation_exact_single_process",
            rep.exact_pe,
            -(-0.5f64).exp_m1(),
            1e-8,
            1,
        ),
        TestReport::against_target("truncation_bound_equality", rep.exact_pe, bound, 1e-8, 1),
        TestReport::against_target(
            "truncation_bound_r5",
            truncation_bound_analytic(1.0, 1.0, 5, 1, 1.0)?,
            0.030767,
            5e-7,
            1,
        ),
        TestReport::against_target(
            "expected_missing_mass_r3",
            expected_missing_mass(1.0, 1.0, 3)?,
            0.125,
            1e-15,
            1,
        ),
    ])
}

/// Simulates the discarded groups `R + 1..=I_max` and counts replicates in
/// which any of `M` Bernoulli draws hits one of their atoms.
pub fn truncation_monte_carlo(seed: u64) -> Result<TestReport> {
    let (alpha, gamma, m, trunc) = (1.0, 1.0, 5u32, 3u32);
    let pb = TruncationProblem::bernoulli(alpha, gamma, m)?;
    let rep = truncation_error_exact(&pb, trunc, Method::Adaptive)?;
    let last = rep.provenance.i_max;
    let root = RngStream::new(seed, 501);
    let n = 100_000;
    let hits: Vec<f64> = (0..n)
        .map(|k| {
            let mut rng = root.derive(k);
            let mut hit = false;
            for i in (trunc + 1)..=last {
                for _ in 0..rv::poisson(gamma, &mut rng)? {
                    let mut w = rv::beta_one(alpha, &mut rng);
                    for _ in 1..i {
                        w *= 1.0 - rv::beta_one(alpha, &mut rng);
                    }
                    for _ in 0..m {
                        hit |= rv::bernoulli(w, &mut rng);
                    }
                }
            }
            Ok(if hit { 1.0 } else { 0.0 })
        })
        .collect::<Result<_>>()?;
    Ok(check_mean(&hits, rep.exact_pe, DEFAULT_SE_MULTIPLE)?
        .named("truncation_monte_carlo")
        .with_rng(&root))
}

/// `exact_PE` must not decrease as the dispersion `r` grows.
pub fn truncation_monotone_in_r() -> Result<TestReport> {
    let mut worst_drop: f64 = 0.0;
    let mut count = 0;
    for trunc in [0u32, 2, 5] {
        let mut prev = 0.0;
        for r in [0.25, 0.5, 1.0, 2.0, 4.0, 8.0] {
            let pb = TruncationProblem::new(1.0, 1.0, 2, r)?;
            let pe = truncation_error_exact(&pb, trunc, Method::Adaptive)?.exact_pe;
            worst_drop = worst_drop.max(prev - pe);
            prev = pe;
            count += 1;
        }
    }
    Ok(TestReport::new("truncation_monotone_in_r", worst_drop, 0.0, count))
}

/// Incremental and from-scratch sweeps over `R = 0..=20` agree, and the
/// exact values decrease in `R` and stay below the analytic bound.
pub fn truncation_sweep_consistency() -> Result<Vec<TestReport>> {
    let (mut gap, mut rise, mut excess): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut count = 0;
    for &(alpha, gamma, m, r) in &[(1.0, 1.0, 1u32, 1.0), (1.0, 1.0, 10, 1.0), (0.5, 2.0, 3, 1.0), (3.0, 1.0, 4, 2.5)] {
        let pb = TruncationProblem::new(alpha, gamma, m, r)?;
        let sweep = TruncationSweep::adaptive(&pb, 20)?;
        let inc = sweep.incremental(20)?;
        for rep in &inc {
            let direct = sweep.from_scratch(rep.truncation)?;
            gap = gap.max((rep.exact_pe - direct.exact_pe).abs());
            excess = excess.max(rep.exact_pe - rep.analytic_bound.unwrap_or(1.0) - rep.quadrature_error);
            count += 1;
        }
        for w in inc.windows(2) {
            rise = rise.max(w[1].exact_pe - w[0].exact_pe);
        }
    }
    Ok(vec![
        TestReport::new("truncation_sweep_routes_agree", gap, 1e-9, count),
        TestReport::new("truncation_nonincreasing_in_r", rise, 0.0, count),
        TestReport::new("truncation_below_bound", excess.max(0.0), 0.0, count),
    ])
}

/// Left-endpoint sums on `n = 1e2, 1e3, 1e4` increase toward the adaptive
/// value without passing it. The statistic counts violations.
pub fn simple_function_lower_convergence() -> Result<TestReport> {
    let mut violations = 0u32;
    let mut count = 0;
    for m in [1u32, 5, 10] {
        let pb = TruncationProblem::bernoulli(1.0, 1.0, m)?;
        let sweep = TruncationSweep::adaptive(&pb, 10)?;
        let grids: Vec<Vec<f64>> = [100, 1000, 10_000]
            .into_iter()
            .map(|n| {
                Ok(simple_function_sweep(&pb, 10, SimpleFunctionGrid::new(n)?)?
                    .into_iter()
                    .map(|r| r.exact_pe)
                    .collect())
            })
            .collect::<Result<_>>()?;
        for r in 0..=10usize {
            let adaptive = sweep.from_scratch(r as u32)?.exact_pe;
            let seq = [grids[0][r], grids[1][r], grids[2][r]];
            if !(seq[0] <= seq[1] && seq[1] <= seq[2] && seq[2] <= adaptive + 1e-12) {
                violations += 1;
            }
            count += 1;
        }
    }
    Ok(TestReport::new(
        "simple_function_lower_convergence",
        f64::from(violations),
        0.0,
        count,
    ))
}

/// `E exp(-H(Theta))` for `alpha = gamma = 1` against `exp(-Ein(1))`.
pub fn laplace_functional(seed: u64) -> Result<TestReport> {
    let c = Construction::Stick(stick(1.0, 1.0)?);
    check_laplace_functional(&c, -1.0, &Region::everywhere(), 100_000, &RngStream::new(seed, 101))
}

/// Samples `H(Theta)` from the four beta process constructions at
/// `alpha = gamma = 1` and compares every pair by two-sample KS.
pub fn construction_equivalence(seed: u64) -> Result<Vec<TestReport>> {
    let base = unit(1.0, 1.0)?;
    let standard = stick(1.0, 1.0)?;
    let gamma_exp = StickBreakingConfig::new(base.clone(), standard.groups, StickVariant::GammaExponential)?;
    let constructions = [
        ("stick", Construction::Stick(standard)),
        ("gamma_exp", Construction::Stick(gamma_exp)),
        ("sieve", Construction::Sieve(SieveConfig::new(base.clone(), 10_000)?)),
        ("array", Construction::Array(ArrayConfig::new(base, 1000, 30)?)),
    ];
    let n = 5000;
    let samples = constructions
        .iter()
        .enumerate()
        .map(|(k, (_, c))| {
            let rng = RngStream::new(seed, 201 + k as u64);
            replicate(n, &rng, |r| c.sample(r), DiscreteMeasure::total_mass)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for a in 0..samples.len() {
        for b in (a + 1)..samples.len() {
            let name = format!("construction_ks_{}_vs_{}", constructions[a].0, constructions[b].0);
            let mut r = ks_two_sample(&samples[a], &samples[b], DEFAULT_LEVEL)?.named(name);
            r.seed = Some(seed);
            out.push(r);
        }
    }
    Ok(out)
}

/// Atoms of weight `>= 0.1` under `BP(1, 1)` are `Pois(ln 10)`.
pub fn atom_count_poisson(seed: u64) -> Result<TestReport> {
    let cfg = stick(1.0, 1.0)?;
    let rng = RngStream::new(seed, 301);
    let counts = replicate(10_000, &rng, |r| crate::construct::sample_bp_stick_breaking(&cfg, r), |h| {
        h.weights().filter(|&w| w >= 0.1).count() as u64
    })?;
    Ok(check_poisson_counts(&counts, 10f64.ln())?
        .named("atom_count_poisson")
        .with_rng(&rng))
}

/// One Bernoulli process over `H ~ BP(1, gamma)` has `Pois(gamma)` ones.
pub fn first_customer_poisson(seed: u64) -> Result<TestReport> {
    let cfg = stick(1.0, 1.0)?;
    let root = RngStream::new(seed, 302);
    let totals = (0..10_000u64)
        .map(|k| {
            let mut rng = root.derive(k);
            let h = crate::construct::sample_bp_stick_breaking(&cfg, &mut rng)?;
            Ok(sample_bernoulli_process(&h, 1, &mut rng)?.total())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(check_poisson_counts(&totals, 1.0)?
        .named("first_customer_poisson")
        .with_rng(&root))
}

/// The stick-broken beta, stick product and product-of-betas identities,
/// each against a direct sampler.
pub fn distributional_identities(seed: u64) -> Result<Vec<TestReport>> {
    let n = 10_000;
    let mut rng = RngStream::new(seed, 401);
    let cfg = rv::StickBrokenBetaConfig::with_default_truncation(2.0, 3.0)?;
    let broken: Vec<f64> = (0..n).map(|_| rv::sample_stick_broken_beta(&cfg, &mut rng)).collect();
    let direct = (0..n).map(|_| rv::beta(2.0, 3.0, &mut rng)).collect::<Result<Vec<_>>>()?;
    let first = ks("stick_broken_beta", &broken, &direct, &rng)?;

    let mut rng = RngStream::new(seed, 402);
    let product = (0..n).map(|_| rv::sample_stick_product(3, 2.0, &mut rng)).collect::<Result<Vec<_>>>()?;
    let direct = (0..n)
        .map(|_| rv::gamma(3.0, 2.0, &mut rng).map(|t| (-t).exp()))
        .collect::<Result<Vec<_>>>()?;
    let second = ks("stick_product_exp_gamma", &product, &direct, &rng)?;

    let mut rng = RngStream::new(seed, 403);
    let mixed = (0..n)
        .map(|_| rv::sample_product_beta(1.5, 2.0, 0.5, 3.0, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let direct = (0..n).map(|_| rv::beta(2.0, 5.0, &mut rng)).collect::<Result<Vec<_>>>()?;
    let third = ks("product_beta", &mixed, &direct, &rng)?;
    Ok(vec![first, second, third])
}

fn single_atom_stats(n: u32, kind: LikelihoodKind, total: u64) -> Result<crate::likelihood::CountStats> {
    let entries: Vec<(u32, u32, u64)> = match kind {
        LikelihoodKind::Bernoulli => (0..total as u32).map(|i| (i, 0, 1)).collect(),
        LikelihoodKind::Negbin { .. } => vec![(0, 0, total)],
    };
    Ok(count_stats(&FeatureMatrix::from_triplets(n, kind, vec![0.5], entries)?))
}

fn observed_weights(spec: &PosteriorSpec, n: usize, rng: &mut RngStream) -> Result<Vec<f64>> {
    (0..n)
        .map(|_| Ok(sample_posterior_any(spec, rng)?.observed_atoms[0].weight))
        .collect()
}

/// Observed-atom weights against the reduced conjugate beta laws.
pub fn posterior_conjugacy(seed: u64) -> Result<Vec<TestReport>> {
    let n = 10_000;
    let cases = [
        ("posterior_bernoulli_all_ones", 2.0, 3u32, LikelihoodKind::Bernoulli, 3u64, (3.0, 2.0)),
        ("posterior_bernoulli_mixed", 1.0, 5, LikelihoodKind::Bernoulli, 2, (2.0, 4.0)),
        ("posterior_negbin", 1.0, 2, LikelihoodKind::Negbin { r: 1.0 }, 4, (4.0, 3.0)),
    ];
    cases
        .iter()
        .enumerate()
        .map(|(k, &(name, alpha, rows, kind, total, (a, b)))| {
            let mut rng = RngStream::new(seed, 601 + k as u64);
            let spec = PosteriorSpec::with_truncation(unit(alpha, 1.0)?, single_atom_stats(rows, kind, total)?, 2)?;
            let w = observed_weights(&spec, n, &mut rng)?;
            let direct = (0..n).map(|_| rv::beta(a, b, &mut rng)).collect::<Result<Vec<_>>>()?;
            ks(name, &w, &direct, &rng)
        })
        .collect()
}

/// `n = 5`, `alpha = 1`, `M1 = 2`: posterior mean `2 / 6`.
pub fn posterior_mean(seed: u64) -> Result<TestReport> {
    let mut rng = RngStream::new(seed, 611);
    let spec = PosteriorSpec::with_truncation(unit(1.0, 1.0)?, single_atom_stats(5, LikelihoodKind::Bernoulli, 2)?, 2)?;
    let w = observed_weights(&spec, 100_000, &mut rng)?;
    Ok(check_mean(&w, 1.0 / 3.0, DEFAULT_SE_MULTIPLE)?
        .named("posterior_mean")
        .with_rng(&rng))
}

/// Summaries of a joint state `(H, X)`.
fn joint_summary(h: &DiscreteMeasure, x: &FeatureMatrix) -> [f64; 3] {
    [h.total_mass(), x.active_columns() as f64, x.total() as f64]
}

/// Joint-distribution check of the posterior sampler. Marginal draws take
/// `H` from the prior and `X | H`. Each of the other chains starts from a
/// marginal draw and alternates `H | X` (the posterior sampler) with
/// `X | H` for a number of sweeps; if the sampler leaves the joint law
/// invariant its final states have the marginal law.
pub fn geweke(seed: u64) -> Result<Vec<TestReport>> {
    let (alpha, gamma, rows, chains, sweeps) = (1.0, 1.0, 3u32, 5000u64, 10);
    let cfg = stick(alpha, gamma)?;
    let base = unit(alpha, gamma)?;
    let marginal_root = RngStream::new(seed, 701);
    let chain_root = RngStream::new(seed, 702);
    let mut marginal = [Vec::new(), Vec::new(), Vec::new()];
    let mut chained = [Vec::new(), Vec::new(), Vec::new()];
    for k in 0..chains {
        let mut rng = marginal_root.derive(k);
        let h = crate::construct::sample_bp_stick_breaking(&cfg, &mut rng)?;
        let x = sample_bernoulli_process(&h, rows, &mut rng)?;
        for (s, v) in marginal.iter_mut().zip(joint_summary(&h, &x)) {
            s.push(v);
        }

        let mut rng = chain_root.derive(k);
        let mut h = crate::construct::sample_bp_stick_breaking(&cfg, &mut rng)?;
        let mut x = sample_bernoulli_process(&h, rows, &mut rng)?;
        for _ in 0..sweeps {
            let spec = PosteriorSpec::with_truncation(base.clone(), count_stats(&x), cfg.groups)?;
            h = sample_posterior_any(&spec, &mut rng)?.to_measure();
            x = sample_bernoulli_process(&h, rows, &mut rng)?;
        }
        for (s, v) in chained.iter_mut().zip(joint_summary(&h, &x)) {
            s.push(v);
        }
    }
    let names = ["geweke_total_mass", "geweke_active_atoms", "geweke_total_count"];
    names
        .iter()
        .zip(marginal.iter().zip(&chained))
        .map(|(name, (a, b))| {
            let mut r = ks_two_sample(a, b, DEFAULT_LEVEL)?.named(*name);
            r.seed = Some(seed);
            Ok(r)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_parse() {
        for name in Suite::NAMES {
            assert_eq!(name.parse::<Suite>().unwrap().name(), name);
        }
        assert!(matches!("bogus".parse::<Suite>(), Err(Error::Unknown { .. })));
    }

    #[test]
    fn report_counts_failures() {
        let r = SuiteReport::new(
            Suite::Levy,
            1,
            vec![TestReport::new("a", 0.0, 1.0, 1), TestReport::new("b", 2.0, 1.0, 1)],
        );
        assert!(!r.passed);
        assert_eq!((r.n_tests, r.n_failed), (2, 1));
    }

    #[test]
    fn levy_suite_passes() {
        let r = run_suite(Suite::Levy, DEFAULT_SEED).unwrap();
        assert!(r.passed, "{r:#?}");
    }
}
