//! Command-line front end. `run` takes the argument list and the value of
//! `BPSEED` explicitly so it can be driven in-process.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::construct::{
    effective_truncation, ArrayConfig, Construction, SieveConfig, StickBreakingConfig, StickVariant,
    DEFAULT_MISSING_MASS,
};
use crate::error::{Error, Result};
use crate::levy::{simple_function_sweep, SimpleFunctionGrid, TruncationProblem, TruncationReport, TruncationSweep};
use crate::likelihood::{sample_bernoulli_process, sample_negbin_process, FeatureMatrix, LikelihoodKind};
use crate::measure::{BaseMeasureSpec, DiscreteMeasure};
use crate::posterior::{sample_posterior_any, PosteriorDraw, PosteriorSpec};
use crate::rng::RngStream;
use crate::verify::{run_suite, Suite, DEFAULT_SEED};

#[derive(Parser, Debug)]
#[command(name = "betaproc", version, about = "Beta process sampling, truncation analysis and checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Draw one beta process (or Dirichlet process) realization.
    Sample(SampleArgs),
    /// Exact and bounded truncation error for R = 0..=Rmax.
    Truncate(TruncateArgs),
    /// Draw Bernoulli or negative binomial processes over a sampled measure.
    Features(FeaturesArgs),
    /// Posterior draws given a feature matrix.
    Posterior(PosteriorArgs),
    /// Run a verification suite; exits 0 iff every check passes.
    Verify(VerifyArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConstructionArg {
    Stick,
    GammaExp,
    PowerLaw,
    Sieve,
    Array,
    Dp,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum LikelihoodArg {
    Bernoulli,
    Negbin,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Adaptive,
    SimpleFunction,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Seed; the BPSEED environment variable takes precedence.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[arg(long, value_enum, default_value_t = ConstructionArg::Stick)]
    pub construction: ConstructionArg,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Stick-breaking groups; defaults to an expected missing mass below 1e-6.
    #[arg(long)]
    pub groups: Option<u32>,
    /// Sieve or array width; an integer larger than gamma.
    #[arg(long = "K")]
    pub k: Option<f64>,
    /// Array depth.
    #[arg(long = "R")]
    pub r: Option<u32>,
    /// Power-law discount in (0, 1).
    #[arg(long)]
    pub beta: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct TruncateArgs {
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Number of likelihood processes.
    #[arg(long = "M", default_value_t = 1)]
    pub m: u32,
    /// Negative binomial dispersion.
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long, value_enum, default_value_t = LikelihoodArg::Bernoulli)]
    pub likelihood: LikelihoodArg,
    #[arg(long = "Rmax", default_value_t = 10)]
    pub rmax: u32,
    #[arg(long, value_enum, default_value_t = MethodArg::Adaptive)]
    pub method: MethodArg,
    /// Simple-function grid size.
    #[arg(long, default_value_t = 1000)]
    pub n: u32,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct FeaturesArgs {
    /// A discrete measure in JSON, as written by `sample`.
    #[arg(long)]
    pub input: PathBuf,
    /// Number of processes.
    #[arg(long)]
    pub n: u32,
    #[arg(long, value_enum, default_value_t = LikelihoodArg::Bernoulli)]
    pub likelihood: LikelihoodArg,
    #[arg(long)]
    pub r: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct PosteriorArgs {
    /// Feature matrix: JSON triplets, or CSV when the name ends in `.csv`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1)]
    pub draws: u32,
    /// Stick-breaking groups for the unobserved part.
    #[arg(long = "R")]
    pub r_groups: Option<u32>,
    /// Likelihood of a CSV input (JSON inputs carry their own).
    #[arg(long, value_enum)]
    pub likelihood: Option<LikelihoodArg>,
    #[arg(long)]
    pub r: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, default_value = "all", value_parser = Suite::NAMES)]
    pub suite: String,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Aggregate report file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code: 0 on success, 1 on failure, 2 on usage errors.
pub fn run<I, T>(args: I, bpseed: Option<&str>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli, bpseed, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

/// Entry point for the binary.
pub fn main_from_env() -> i32 {
    let bpseed = std::env::var("BPSEED").ok();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), bpseed.as_deref(), &mut stdout.lock(), &mut stderr.lock())
}

fn resolve_seed(flag: Option<u64>, bpseed: Option<&str>, default: u64) -> Result<u64> {
    match bpseed {
        Some(s) => s.trim().parse().map_err(|_| Error::Malformed {
            record: format!("BPSEED={s}"),
            reason: "not an unsigned integer".into(),
        }),
        None => Ok(flag.unwrap_or(default)),
    }
}

fn execute(cli: Cli, bpseed: Option<&str>, stdout: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Sample(a) => cmd_sample(a, bpseed, stdout),
        Command::Truncate(a) => cmd_truncate(a, stdout),
        Command::Features(a) => cmd_features(a, bpseed, stdout),
        Command::Posterior(a) => cmd_posterior(a, bpseed, stdout),
        Command::Verify(a) => cmd_verify(a, bpseed, stdout),
    }
}

/// Writes `body` to `--out`, or to stdout when absent. Returns whether a
/// file was written so summaries can go to stdout.
fn emit(out: &Option<PathBuf>, body: &[u8], stdout: &mut dyn Write) -> Result<bool> {
    match out {
        Some(path) => {
            fs::write(path, body)?;
            Ok(true)
        }
        None => {
            stdout.write_all(body)?;
            Ok(false)
        }
    }
}

fn with_newline(mut s: String) -> Vec<u8> {
    s.push('\n');
    s.into_bytes()
}

/// Shortest representation that parses back to the same value.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn integer_k(k: Option<f64>, gamma: f64) -> Result<u32> {
    let k = k.ok_or(Error::param("K", f64::NAN, "required for this construction"))?;
    if !(k.fract() == 0.0 && k >= 1.0 && k <= f64::from(u32::MAX)) {
        return Err(Error::param("K", k, "must be a positive integer"));
    }
    if k <= gamma {
        return Err(Error::param("K", k, "must exceed gamma"));
    }
    Ok(k as u32)
}

fn build_construction(a: &SampleArgs) -> Result<Construction> {
    let base = BaseMeasureSpec::unit(a.alpha, a.gamma)?;
    let groups = a
        .groups
        .unwrap_or_else(|| effective_truncation(a.alpha, a.gamma, DEFAULT_MISSING_MASS));
    let stick = |variant| StickBreakingConfig::new(base.clone(), groups, variant).map(Construction::Stick);
    match a.construction {
        ConstructionArg::Stick => stick(StickVariant::Standard),
        ConstructionArg::GammaExp => stick(StickVariant::GammaExponential),
        ConstructionArg::PowerLaw => {
            let discount = a.beta.ok_or(Error::param("beta", f64::NAN, "required for power-law"))?;
            stick(StickVariant::PowerLaw { discount })
        }
        ConstructionArg::Sieve => Ok(Construction::Sieve(SieveConfig::new(base.clone(), integer_k(a.k, a.gamma)?)?)),
        ConstructionArg::Array => {
            let rows = a.r.ok_or(Error::param("R", f64::NAN, "required for the array construction"))?;
            Ok(Construction::Array(ArrayConfig::new(base.clone(), integer_k(a.k, a.gamma)?, rows)?))
        }
        ConstructionArg::Dp => {
            if groups == 0 {
                return Err(Error::param("groups", 0.0, "must be >= 1"));
            }
            Ok(Construction::Dp { base, groups })
        }
    }
}

fn measure_csv(m: &DiscreteMeasure) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["location", "weight", "group", "index_in_group"])?;
    for a in &m.atoms {
        w.write_record([num(a.location), num(a.weight), a.group.to_string(), a.index_in_group.to_string()])?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn cmd_sample(a: SampleArgs, bpseed: Option<&str>, stdout: &mut dyn Write) -> Result<i32> {
    let construction = build_construction(&a)?;
    let seed = resolve_seed(a.common.seed, bpseed, 0)?;
    let mut rng = RngStream::new(seed, a.common.stream);
    let m = construction.sample(&mut rng)?;
    let body = match a.common.format {
        Format::Json => with_newline(m.to_json()?),
        Format::Csv => measure_csv(&m)?,
    };
    if emit(&a.common.out, &body, stdout)? {
        writeln!(stdout, "atoms: {}, total mass: {}", m.len(), num(m.total_mass()))?;
    }
    Ok(0)
}

fn truncation_dispersion(likelihood: LikelihoodArg, r: Option<f64>) -> Result<f64> {
    match (likelihood, r) {
        (LikelihoodArg::Bernoulli, None | Some(1.0)) => Ok(1.0),
        (LikelihoodArg::Bernoulli, Some(r)) => Err(Error::param("r", r, "only negbin takes a dispersion")),
        (LikelihoodArg::Negbin, r) => {
            let r = r.ok_or(Error::param("r", f64::NAN, "required for negbin"))?;
            LikelihoodKind::negbin(r).map(|k| k.dispersion())
        }
    }
}

fn reports_csv(reports: &[TruncationReport]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "R",
        "M",
        "r",
        "exact_PE",
        "analytic_bound",
        "expected_missing_mass",
        "quadrature_error",
        "method",
        "I_max",
        "remainder_bound",
    ])?;
    for r in reports {
        let method = serde_json::to_value(r.provenance.method)?;
        w.write_record([
            r.truncation.to_string(),
            r.processes.to_string(),
            num(r.r),
            num(r.exact_pe),
            r.analytic_bound.map(num).unwrap_or_default(),
            num(r.expected_missing_mass),
            num(r.quadrature_error),
            method.as_str().unwrap_or_default().to_string(),
            r.provenance.i_max.to_string(),
            num(r.provenance.remainder_bound),
        ])?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn cmd_truncate(a: TruncateArgs, stdout: &mut dyn Write) -> Result<i32> {
    let r = truncation_dispersion(a.likelihood, a.r)?;
    let problem = TruncationProblem::new(a.alpha, a.gamma, a.m, r)?;
    let reports = match a.method {
        MethodArg::Adaptive => TruncationSweep::adaptive(&problem, a.rmax)?.incremental(a.rmax)?,
        MethodArg::SimpleFunction => simple_function_sweep(&problem, a.rmax, SimpleFunctionGrid::new(a.n)?)?,
    };
    let body = match a.common.format {
        Format::Json => with_newline(serde_json::to_string_pretty(&reports)?),
        Format::Csv => reports_csv(&reports)?,
    };
    if emit(&a.common.out, &body, stdout)? {
        for rep in &reports {
            writeln!(
                stdout,
                "R={} exact_PE={} bound={}",
                rep.truncation,
                num(rep.exact_pe),
                rep.analytic_bound.map(num).unwrap_or_default()
            )?;
        }
    }
    Ok(0)
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(Error::from)
}

fn cmd_features(a: FeaturesArgs, bpseed: Option<&str>, stdout: &mut dyn Write) -> Result<i32> {
    let h = DiscreteMeasure::from_json(&read_to_string(&a.input)?)?;
    let seed = resolve_seed(a.common.seed, bpseed, 0)?;
    let mut rng = RngStream::new(seed, a.common.stream);
    let x = match a.likelihood {
        LikelihoodArg::Bernoulli => {
            truncation_dispersion(LikelihoodArg::Bernoulli, a.r)?;
            sample_bernoulli_process(&h, a.n, &mut rng)?
        }
        LikelihoodArg::Negbin => {
            let r = truncation_dispersion(LikelihoodArg::Negbin, a.r)?;
            sample_negbin_process(&h, a.n, r, &mut rng)?
        }
    };
    let body = match a.common.format {
        Format::Json => with_newline(x.to_json()?),
        Format::Csv => {
            let mut buf = Vec::new();
            x.write_csv(&mut buf)?;
            buf
        }
    };
    if emit(&a.common.out, &body, stdout)? {
        writeln!(stdout, "processes: {}, atoms: {}, total count: {}", x.n(), x.n_atoms(), x.total())?;
    }
    Ok(0)
}

fn read_matrix(a: &PosteriorArgs) -> Result<FeatureMatrix> {
    let text = read_to_string(&a.input)?;
    let is_csv = a.input.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        let kind = match a.likelihood.unwrap_or(LikelihoodArg::Bernoulli) {
            LikelihoodArg::Bernoulli => LikelihoodKind::Bernoulli,
            LikelihoodArg::Negbin => LikelihoodKind::negbin(truncation_dispersion(LikelihoodArg::Negbin, a.r)?)?,
        };
        FeatureMatrix::read_csv(text.as_bytes(), kind)
    } else {
        if a.likelihood.is_some() || a.r.is_some() {
            return Err(Error::param("likelihood", f64::NAN, "JSON inputs carry their own likelihood"));
        }
        FeatureMatrix::from_json(&text)
    }
}

fn draws_csv(draws: &[PosteriorDraw]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["draw", "location", "weight", "observed"])?;
    for (k, d) in draws.iter().enumerate() {
        for a in &d.observed_atoms {
            w.write_record([k.to_string(), num(a.location), num(a.weight), "true".into()])?;
        }
        for a in &d.unobserved_part.atoms {
            w.write_record([k.to_string(), num(a.location), num(a.weight), "false".into()])?;
        }
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn cmd_posterior(a: PosteriorArgs, bpseed: Option<&str>, stdout: &mut dyn Write) -> Result<i32> {
    let x = read_matrix(&a)?;
    let base = BaseMeasureSpec::unit(a.alpha, a.gamma)?;
    let spec = match a.r_groups {
        Some(r) => PosteriorSpec::with_truncation(base, crate::likelihood::count_stats(&x), r)?,
        None => PosteriorSpec::from_matrix(base, &x)?,
    };
    if a.draws == 0 {
        return Err(Error::param("draws", 0.0, "must be >= 1"));
    }
    let seed = resolve_seed(a.common.seed, bpseed, 0)?;
    let root = RngStream::new(seed, a.common.stream);
    let draws = (0..a.draws)
        .map(|k| sample_posterior_any(&spec, &mut root.derive(u64::from(k))))
        .collect::<Result<Vec<_>>>()?;
    let body = match a.common.format {
        Format::Json => with_newline(PosteriorDraw::many_to_json(&draws)?),
        Format::Csv => draws_csv(&draws)?,
    };
    if emit(&a.common.out, &body, stdout)? {
        let observed: Vec<usize> = spec.stats.observed().collect();
        writeln!(stdout, "draws: {}, observed atoms: {}", draws.len(), observed.len())?;
        for (k, &j) in observed.iter().enumerate() {
            let mean = draws.iter().map(|d| d.observed_atoms[k].weight).sum::<f64>() / draws.len() as f64;
            writeln!(stdout, "  location {} count {} mean weight {}", num(spec.stats.atoms[j]), spec.stats.m1[j], num(mean))?;
        }
    }
    Ok(0)
}

fn cmd_verify(a: VerifyArgs, bpseed: Option<&str>, stdout: &mut dyn Write) -> Result<i32> {
    let suite: Suite = a.suite.parse()?;
    let seed = resolve_seed(a.seed, bpseed, DEFAULT_SEED)?;
    let report = run_suite(suite, seed)?;
    for t in &report.tests {
        writeln!(
            stdout,
            "{:<4} {:<40} statistic={} threshold={}",
            if t.passed() { "PASS" } else { "FAIL" },
            t.test_name,
            num(t.statistic),
            num(t.threshold)
        )?;
    }
    writeln!(
        stdout,
        "suite {} seed {}: {}/{} passed",
        report.suite,
        report.seed,
        report.n_tests - report.n_failed,
        report.n_tests
    )?;
    if let Some(path) = &a.out {
        fs::write(path, with_newline(serde_json::to_string_pretty(&report)?))?;
    }
    Ok(if report.passed { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str], bpseed: Option<&str>) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["betaproc"];
        full.extend_from_slice(args);
        let code = run(full, bpseed, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn sample_stick_respects_groups() {
        let (code, out, _) = run_capture(&["sample", "--construction", "stick", "--groups", "20", "--seed", "7"], None);
        assert_eq!(code, 0);
        let m = DiscreteMeasure::from_json(&out).unwrap();
        assert!(m.atoms.iter().all(|a| a.group <= 20));
        assert_eq!(m.truncation_level, 20);
    }

    #[test]
    fn sieve_needs_k_above_gamma() {
        let (code, _, err) = run_capture(&["sample", "--construction", "sieve", "--K", "0.5", "--gamma", "1"], None);
        assert_eq!(code, 1);
        assert!(err.contains("K"), "{err}");
        let (code, _, _) = run_capture(&["sample", "--construction", "sieve", "--K", "10.5"], None);
        assert_eq!(code, 1);
        let (code, _, _) = run_capture(&["sample", "--construction", "sieve", "--K", "50"], None);
        assert_eq!(code, 0);
    }

    #[test]
    fn bpseed_overrides_flag() {
        let a = run_capture(&["sample", "--seed", "1"], Some("9"));
        let b = run_capture(&["sample", "--seed", "9"], None);
        let c = run_capture(&["sample", "--seed", "1"], None);
        assert_eq!(a.1, b.1);
        assert_ne!(a.1, c.1);
        assert_eq!(run_capture(&["sample"], Some("x")).0, 1);
    }

    #[test]
    fn truncate_reports() {
        let (code, out, _) = run_capture(&["truncate", "--alpha", "1", "--gamma", "1", "--M", "1", "--Rmax", "5"], None);
        assert_eq!(code, 0);
        let v: Vec<TruncationReport> = serde_json::from_str(&out).unwrap();
        assert_eq!(v.len(), 6);
        assert!((v[1].exact_pe - 0.393469).abs() < 1e-6);
        assert!((v[5].analytic_bound.unwrap() - 0.030767).abs() < 1e-6);
        let (_, out, _) = run_capture(&["truncate", "--Rmax", "0"], None);
        assert_eq!(serde_json::from_str::<Vec<TruncationReport>>(&out).unwrap().len(), 1);
        let (_, out, _) = run_capture(&["truncate", "--likelihood", "negbin", "--r", "2", "--Rmax", "0"], None);
        let v: Vec<TruncationReport> = serde_json::from_str(&out).unwrap();
        assert!((v[0].analytic_bound.unwrap() - (1.0 - (-2.0f64).exp())).abs() < 1e-12);
        assert_eq!(run_capture(&["truncate", "--r", "2"], None).0, 1);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_capture(&["verify", "--suite", "nope"], None).0, 2);
        assert_eq!(run_capture(&["sample", "--construction", "tree"], None).0, 2);
        assert_eq!(run_capture(&[], None).0, 2);
    }

    #[test]
    fn posterior_of_all_ones() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("x.json");
        let x = FeatureMatrix::from_triplets(3, LikelihoodKind::Bernoulli, vec![0.5], [(0, 0, 1), (1, 0, 1), (2, 0, 1)]).unwrap();
        fs::write(&input, x.to_json().unwrap()).unwrap();
        let out = dir.path().join("draws.json");
        let (code, summary, err) = run_capture(
            &["posterior", "--input", input.to_str().unwrap(), "--alpha", "2", "--draws", "2000", "--R", "3", "--out", out.to_str().unwrap()],
            None,
        );
        assert_eq!(code, 0, "{err}");
        assert!(summary.contains("observed atoms: 1"));
        let draws: Vec<serde_json::Value> = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
        let mean = draws
            .iter()
            .map(|d| d["atoms"][0]["weight"].as_f64().unwrap())
            .sum::<f64>()
            / draws.len() as f64;
        // Beta(3, 2): mean 0.6, sd 0.2
        assert!((mean - 0.6).abs() < 4.0 * 0.2 / (2000f64).sqrt());
    }

    #[test]
    fn posterior_rejects_bad_input() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("x.csv");
        fs::write(&input, "0.5\n1\n").unwrap();
        let path = input.to_str().unwrap();
        let (code, _, err) = run_capture(&["posterior", "--input", path, "--likelihood", "negbin", "--r", "0"], None);
        assert_eq!(code, 1, "{err}");
        fs::write(&input, "0.5\n1\nz\n").unwrap();
        let (code, _, err) = run_capture(&["posterior", "--input", path], None);
        assert_eq!(code, 1);
        assert!(err.contains("line 3"), "{err}");
    }
}
