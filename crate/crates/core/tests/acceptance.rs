//! One line per acceptance criterion. Exits nonzero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use betaproc::verify::suites;
use betaproc::verify::{TestReport, DEFAULT_SEED};

struct Outcome {
    passed: bool,
    detail: String,
}

fn from_reports(reports: &[TestReport]) -> Outcome {
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed()).map(|r| r.test_name.as_str()).collect();
    let worst = reports
        .iter()
        .map(|r| r.statistic / r.threshold)
        .fold(0.0f64, f64::max);
    Outcome {
        passed: failed.is_empty(),
        detail: if failed.is_empty() {
            format!("{} checks, max statistic/threshold {worst:.3}", reports.len())
        } else {
            format!("failed: {}", failed.join(", "))
        },
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> betaproc::Result<Vec<TestReport>>) -> Outcome {
    let start = Instant::now();
    let mut out = match f() {
        Ok(reports) => from_reports(&reports),
        Err(e) => Outcome { passed: false, detail: format!("error: {e}") },
    };
    let took = start.elapsed();
    if took > limit {
        out.passed = false;
        out.detail.push_str(&format!("; over time budget {}s", limit.as_secs()));
    }
    out
}

fn criterion_1() -> Outcome {
    timed(Duration::from_secs(60), || Ok(vec![suites::levy_density_identity()?]))
}

fn criterion_2() -> Outcome {
    timed(Duration::MAX, suites::group_moments)
}

fn criterion_3() -> Outcome {
    timed(Duration::from_secs(120), || Ok(vec![suites::laplace_functional(DEFAULT_SEED)?]))
}

fn criterion_4() -> Outcome {
    timed(Duration::MAX, || suites::construction_equivalence(DEFAULT_SEED))
}

fn criterion_5() -> Outcome {
    timed(Duration::MAX, || {
        let mut r = suites::truncation_closed_forms()?;
        r.push(suites::truncation_monte_carlo(DEFAULT_SEED)?);
        r.push(suites::truncation_monotone_in_r()?);
        Ok(r)
    })
}

fn criterion_6() -> Outcome {
    timed(Duration::MAX, || Ok(vec![suites::atom_count_poisson(DEFAULT_SEED)?]))
}

fn criterion_7() -> Outcome {
    timed(Duration::MAX, || Ok(vec![suites::first_customer_poisson(DEFAULT_SEED)?]))
}

fn criterion_8() -> Outcome {
    timed(Duration::MAX, || {
        let mut r = suites::posterior_conjugacy(DEFAULT_SEED)?;
        r.extend(suites::geweke(DEFAULT_SEED)?);
        Ok(r)
    })
}

fn criterion_9() -> Outcome {
    timed(Duration::MAX, || suites::distributional_identities(DEFAULT_SEED))
}

fn run_cli(dir: &Path, args: &[&str]) -> Result<(Option<i32>, Vec<u8>), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_betaproc"))
        .args(args)
        .current_dir(dir)
        .env_remove("BPSEED")
        .output()
        .map_err(|e| e.to_string())?;
    Ok((out.status.code(), out.stdout))
}

fn criterion_10() -> Outcome {
    let dir = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => return Outcome { passed: false, detail: e.to_string() },
    };
    let d = dir.path();
    let commands: [(&[&str], &str); 5] = [
        (&["sample", "--construction", "sieve", "--K", "500", "--seed", "9", "--out", "m.json"], "m.json"),
        (&["features", "--input", "m.json", "--n", "5", "--seed", "9", "--out", "x.json"], "x.json"),
        (&["posterior", "--input", "x.json", "--draws", "20", "--seed", "9", "--out", "p.json"], "p.json"),
        (&["truncate", "--M", "5", "--Rmax", "6", "--out", "t.json"], "t.json"),
        (&["verify", "--suite", "all", "--seed", "9", "--out", "v.json"], "v.json"),
    ];
    let mut mismatched = Vec::new();
    let mut failed = Vec::new();
    let mut verify_time = Duration::ZERO;
    let mut first = Vec::new();
    for pass in 0..2 {
        for (k, (args, file)) in commands.iter().enumerate() {
            let start = Instant::now();
            let result = run_cli(d, args).and_then(|(code, stdout)| {
                std::fs::read(d.join(file)).map(|f| (code, stdout, f)).map_err(|e| e.to_string())
            });
            if args[0] == "verify" {
                verify_time = verify_time.max(start.elapsed());
            }
            match result {
                Ok((Some(0), stdout, bytes)) => {
                    if pass == 0 {
                        first.push((stdout, bytes));
                    } else if first[k] != (stdout, bytes) {
                        mismatched.push(args[0]);
                    }
                }
                Ok((code, _, _)) => failed.push(format!("{} exit {code:?}", args[0])),
                Err(e) => failed.push(format!("{}: {e}", args[0])),
            }
        }
    }
    let in_budget = verify_time <= Duration::from_secs(600);
    let passed = mismatched.is_empty() && failed.is_empty() && in_budget;
    let detail = if passed {
        format!("{} commands rerun identically; verify --suite all within the 600s budget", commands.len())
    } else {
        format!("mismatched: {mismatched:?}; failed: {failed:?}; verify within budget: {in_budget}")
    };
    Outcome { passed, detail }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("levy density identity", criterion_1),
        ("per-group moments", criterion_2),
        ("laplace functional", criterion_3),
        ("construction equivalence", criterion_4),
        ("truncation exactness", criterion_5),
        ("atom count poisson", criterion_6),
        ("first customer poisson", criterion_7),
        ("posterior conjugacy", criterion_8),
        ("distributional identities", criterion_9),
        ("reproducibility", criterion_10),
    ];
    let mut all = true;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        all &= o.passed;
        println!("criterion {:>2} {:<26} {}  {}", k + 1, name, if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    if !all {
        std::process::exit(1);
    }
}
