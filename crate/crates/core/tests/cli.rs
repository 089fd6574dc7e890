use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn betaproc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_betaproc"))
        .args(args)
        .current_dir(dir)
        .env_remove("BPSEED")
        .output()
        .expect("spawn betaproc")
}

fn ok(args: &[&str], dir: &Path) -> Output {
    let out = betaproc(args, dir);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

#[test]
fn every_command_is_byte_identical_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let runs: [&[&str]; 6] = [
        &["sample", "--construction", "array", "--K", "50", "--R", "5", "--seed", "3", "--out", "m.json"],
        &["sample", "--construction", "power-law", "--beta", "0.2", "--groups", "8", "--seed", "3", "--format", "csv", "--out", "m.csv"],
        &["features", "--input", "m.json", "--n", "6", "--seed", "4", "--out", "x.json"],
        &["posterior", "--input", "x.json", "--draws", "5", "--seed", "5", "--out", "p.json"],
        &["truncate", "--M", "3", "--Rmax", "4", "--out", "t.json"],
        &["verify", "--suite", "posterior", "--seed", "42", "--out", "v.json"],
    ];
    let files = ["m.json", "m.csv", "x.json", "p.json", "t.json", "v.json"];
    let mut first = Vec::new();
    for args in runs {
        first.push(ok(args, d).stdout);
    }
    let snapshot: Vec<Vec<u8>> = files.iter().map(|f| fs::read(d.join(f)).unwrap()).collect();
    for (args, prev) in runs.iter().zip(&first) {
        assert_eq!(&ok(args, d).stdout, prev, "{args:?}");
    }
    for (f, prev) in files.iter().zip(&snapshot) {
        assert_eq!(&fs::read(d.join(f)).unwrap(), prev, "{f}");
    }
}

#[test]
fn bpseed_env_overrides_flag() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, env: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_betaproc"));
        c.args(["sample", "--seed", seed]).current_dir(dir.path()).env_remove("BPSEED");
        if let Some(v) = env {
            c.env("BPSEED", v);
        }
        c.output().unwrap().stdout
    };
    assert_eq!(run("1", Some("2")), run("2", None));
    assert_ne!(run("1", None), run("2", None));
}

#[test]
fn summary_goes_to_stdout_with_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["sample", "--seed", "1", "--out", "m.json"], dir.path());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("atoms: "), "{text}");
    assert!(text.contains("total mass: "));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let bad_k = betaproc(&["sample", "--construction", "sieve", "--K", "0.5", "--gamma", "1"], d);
    assert_eq!(bad_k.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad_k.stderr).starts_with("error: "));
    assert_eq!(betaproc(&["verify", "--suite", "everything"], d).status.code(), Some(2));
    assert_eq!(betaproc(&["posterior", "--input", "missing.json"], d).status.code(), Some(1));
    fs::write(d.join("bad.json"), r#"{"n":2,"likelihood":{"kind":"negbin","r":-1},"atoms":[],"entries":[]}"#).unwrap();
    assert_eq!(betaproc(&["posterior", "--input", "bad.json"], d).status.code(), Some(1));
}

#[test]
fn empty_matrix_gives_prior_draws() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("x.json"), r#"{"n":0,"likelihood":{"kind":"bernoulli"},"atoms":[],"entries":[]}"#).unwrap();
    ok(&["posterior", "--input", "x.json", "--draws", "2000", "--seed", "1", "--out", "p.json"], d);
    let draws: Vec<serde_json::Value> = serde_json::from_str(&fs::read_to_string(d.join("p.json")).unwrap()).unwrap();
    let masses: Vec<f64> = draws
        .iter()
        .map(|d| d["atoms"].as_array().unwrap().iter().map(|a| a["weight"].as_f64().unwrap()).sum())
        .collect();
    let mean = masses.iter().sum::<f64>() / masses.len() as f64;
    // prior BP(1, 1): E H = 1, Var H = 1/2
    assert!((mean - 1.0).abs() < 4.0 * (0.5f64 / 2000.0).sqrt(), "{mean}");
    assert!(draws.iter().all(|d| d["atoms"].as_array().unwrap().iter().all(|a| a["observed"] == false)));
}

#[test]
fn posterior_mean_over_ten_thousand_draws() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("x.csv"), "0.5\n1\n1\n1\n").unwrap();
    ok(&["posterior", "--input", "x.csv", "--alpha", "2", "--R", "2", "--draws", "10000", "--seed", "8", "--out", "p.json"], d);
    let draws: Vec<serde_json::Value> = serde_json::from_str(&fs::read_to_string(d.join("p.json")).unwrap()).unwrap();
    assert_eq!(draws.len(), 10_000);
    let w: Vec<f64> = draws.iter().map(|d| d["atoms"][0]["weight"].as_f64().unwrap()).collect();
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    // Beta(3, 2)
    assert!((mean - 0.6).abs() < 4.0 * 0.2 / 100.0, "{mean}");
}

#[test]
fn truncate_csv_round_trips_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["truncate", "--Rmax", "2", "--format", "csv"], dir.path());
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 3);
    let pe: f64 = rows[1][3].parse().unwrap();
    assert!((pe - (1.0 - (-0.5f64).exp())).abs() < 1e-8);
    assert_eq!(format!("{pe:?}"), &rows[1][3]);
}
