use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bandcap(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bandcap"))
        .args(args)
        .current_dir(dir)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .env_remove("BANDCAP_OUT_DIR")
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = bandcap(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(dir: &Path, args: &[&str]) -> Value {
    let mut a = args.to_vec();
    a.extend(["--emit", "json"]);
    serde_json::from_str(&ok(dir, &a)).unwrap()
}

/// Data lines of a CSV artifact: everything after the comments and header.
fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect()
}

fn header(csv: &str) -> &str {
    csv.lines().find(|l| !l.starts_with('#')).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let k = header(csv).split(',').position(|h| h == name).unwrap();
    data_rows(csv)
        .iter()
        .map(|r| r.split(',').nth(k).unwrap().parse().unwrap())
        .collect()
}

const BAND: [&str; 4] = ["--omega", "3.14159265", "--t-obs", "20"];

#[test]
fn dof_reports_count_and_n0() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["dof"];
    args.extend(BAND);
    args.extend(["--energy", "1", "--mu", "0.1"]);
    let v = json(dir.path(), &args);
    let r = &v["result"];
    let n = r["n_dof"].as_u64().unwrap();
    assert!((20..=44).contains(&n));
    assert!((r["n0"].as_f64().unwrap() - 20.0).abs() < 1e-6);
    assert!(r["asymptotic"].as_f64().is_some());
    assert_eq!(v["manifest"]["command"], "dof");
}

#[test]
fn compare_shows_entropy_rate_two() {
    let dir = tempfile::tempdir().unwrap();
    let table = ok(
        dir.path(),
        &["compare", "--omega", "3.14159265", "--snr", "16"],
    );
    let line = table
        .lines()
        .find(|l| l.starts_with("Rate distortion"))
        .unwrap();
    assert!(line.contains("H_eps"));
    let v = json(
        dir.path(),
        &["compare", "--omega", "3.14159265", "--snr", "16"],
    );
    let rd = v["result"]["rows"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["label"] == "Rate distortion")
        .unwrap()
        .clone();
    assert!((rd["deterministic_lower"].as_f64().unwrap() - 2.0).abs() < 1e-6);
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["simulate"];
    args.extend(BAND);
    args.extend([
        "--energy",
        "16",
        "--eps",
        "1",
        "--delta",
        "0.1",
        "--samples",
        "10",
    ]);
    let out = bandcap(dir.path(), &args);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("100"));

    let out = bandcap(dir.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));

    let out = bandcap(
        dir.path(),
        &[
            "bounds", "--omega", "1", "--t-obs", "1", "--energy", "1", "--eps", "1", "--delta", "2",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_codes_by_error_kind() {
    assert_eq!(bandcap::Error::Numerical("x".into()).exit_code(), 3);
    assert_eq!(bandcap::Error::Config("x".into()).exit_code(), 2);
    let dir = tempfile::tempdir().unwrap();
    let out = bandcap(
        dir.path(),
        &[
            "dof",
            "--omega",
            "3.14159265",
            "--t-obs",
            "20",
            "--energy",
            "1",
            "--mu",
            "1e-12",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("insufficient spectrum"));
    assert_eq!(bandcap(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["simulate"];
    args.extend(["--omega", "3.14159265", "--t-obs", "4"]);
    args.extend([
        "--energy",
        "16",
        "--eps",
        "1",
        "--delta",
        "0.1",
        "--samples",
        "500",
        "--seed",
        "3",
    ]);
    for emit in ["json", "csv"] {
        let mut a = args.clone();
        a.extend(["--emit", emit]);
        assert_eq!(ok(dir.path(), &a), ok(dir.path(), &a));
    }
    let mut other = args.clone();
    *other.last_mut().unwrap() = "4";
    assert_ne!(ok(dir.path(), &args), ok(dir.path(), &other));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("artifacts");
    let out = Command::new(env!("CARGO_BIN_EXE_bandcap"))
        .args(["compare", "--omega", "1", "--snr", "4", "--emit", "csv"])
        .current_dir(dir.path())
        .env("BANDCAP_OUT_DIR", &target)
        .env("SOURCE_DATE_EPOCH", "0")
        .output()
        .unwrap();
    assert!(out.status.success());
    let written = std::fs::read_to_string(target.join("compare.csv")).unwrap();
    assert_eq!(written.as_bytes(), &out.stdout[..]);
    assert!(written.starts_with("# manifest: "));
    let m: Value = serde_json::from_str(
        written
            .lines()
            .next()
            .unwrap()
            .strip_prefix("# manifest: ")
            .unwrap(),
    )
    .unwrap();
    assert_eq!(m["timestamp"], "1970-01-01T00:00:00Z");
}

#[test]
fn hz_flag_scales_by_two_pi() {
    let dir = tempfile::tempdir().unwrap();
    let a = json(
        dir.path(),
        &["compare", "--omega", "0.5", "--hz", "--snr", "9"],
    );
    let b = json(
        dir.path(),
        &["compare", "--omega", "3.141592653589793", "--snr", "9"],
    );
    assert_eq!(a["result"]["rows"], b["result"]["rows"]);
}

fn bounds_args() -> Vec<&'static str> {
    let mut a = vec!["bounds"];
    a.extend(BAND);
    a.extend([
        "--energy", "16", "--eps", "0.5", "--delta", "0.1", "--emit", "csv",
    ]);
    a
}

#[test]
fn one_point_sweep_matches_bounds() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("grid.conf"),
        "# single point\nomega = 3.14159265\nt_obs = 20\nenergy = 16\neps = 0.5\ndelta = 0.1\n",
    )
    .unwrap();
    ok(dir.path(), &["sweep", "grid.conf"]);
    let sweep = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let bounds = ok(dir.path(), &bounds_args());
    assert_eq!(header(&sweep), header(&bounds));
    assert_eq!(data_rows(&sweep), data_rows(&bounds));
}

#[test]
fn descending_eps_gives_non_decreasing_lower_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let mut conf = String::from("omega = 3.14159265\nt_obs = 20\nenergy = 16\ndelta = 0.1\n");
    for k in 0..15 {
        conf += &format!("eps = {}\n", 3.0 - 0.19 * k as f64);
    }
    std::fs::write(dir.path().join("eps.conf"), conf).unwrap();
    ok(dir.path(), &["sweep", "eps.conf", "--output", "eps.csv"]);
    let csv = std::fs::read_to_string(dir.path().join("eps.csv")).unwrap();
    assert_eq!(data_rows(&csv).len(), 15);
    for col in [
        "c2eps_lower_bits",
        "cepsdelta_lower_bits",
        "heps_lower_bits",
    ] {
        let v = column(&csv, col);
        assert!(v.windows(2).all(|w| w[1] >= w[0]), "{col}: {v:?}");
    }
}

#[test]
fn fifty_snr_points_give_fifty_rows() {
    let dir = tempfile::tempdir().unwrap();
    let mut conf = String::from("omega = 1\nt_obs = 30\neps = 1\ndelta = 0.2\n");
    for k in 0..50 {
        conf += &format!("snr = {}\n", 10f64.powf(k as f64 / 10.0));
    }
    std::fs::write(dir.path().join("snr.conf"), conf).unwrap();
    ok(dir.path(), &["sweep", "snr.conf", "--jobs", "3"]);
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(data_rows(&csv).len(), 50);
    let snr = column(&csv, "snr_k");
    assert!(snr.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn interrupted_sweep_resumes_to_the_same_file() {
    let dir = tempfile::tempdir().unwrap();
    let conf = "omega = 3.14159265\nt_obs = 10\nt_obs = 20\nenergy = 16\neps = 1\neps = 0.5\ndelta = 0.1\ndelta = 0.3\n";
    std::fs::write(dir.path().join("g.conf"), conf).unwrap();
    ok(dir.path(), &["sweep", "g.conf", "--output", "full.csv"]);
    let full = std::fs::read_to_string(dir.path().join("full.csv")).unwrap();
    assert_eq!(data_rows(&full).len(), 8);

    let lines: Vec<&str> = full.split_inclusive('\n').collect();
    let partial = lines[..5].concat() + &lines[5][..10];
    std::fs::write(dir.path().join("full.csv"), partial).unwrap();
    ok(dir.path(), &["sweep", "g.conf", "--output", "full.csv"]);
    assert_eq!(
        std::fs::read_to_string(dir.path().join("full.csv")).unwrap(),
        full
    );

    std::fs::write(
        dir.path().join("g.conf"),
        conf.replace("delta = 0.3", "delta = 0.4"),
    )
    .unwrap();
    let out = bandcap(dir.path(), &["sweep", "g.conf", "--output", "full.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--restart"));
    ok(
        dir.path(),
        &["sweep", "g.conf", "--output", "full.csv", "--restart"],
    );
}

#[test]
fn malformed_config_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.conf"),
        "omega = 1\nt_obs = 2\neps = one\n",
    )
    .unwrap();
    let out = bandcap(dir.path(), &["sweep", "bad.conf"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.conf:3"));
}

#[test]
fn exponent_sweep_emits_one_row_per_time() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(
        dir.path(),
        &[
            "exponent-sweep",
            "--omega",
            "3.14159265",
            "--energy",
            "4",
            "--eps",
            "1",
            "--rate",
            "0.5",
            "--t-list",
            "4,6",
            "--samples",
            "200",
            "--dim",
            "4",
            "--geometry",
            "ball",
        ],
    );
    assert_eq!(header(&out), "T,M,delta_hat,ci_lo,ci_hi,fitted_slope");
    assert_eq!(data_rows(&out).len(), 2);
    assert!(out.lines().any(|l| l.starts_with("# predicted exponent")));
}

#[test]
fn spectrum_output_feeds_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = vec!["spectrum"];
    s.extend(BAND);
    s.extend(["--emit", "json", "--output", "spec.json"]);
    ok(dir.path(), &s);
    let mut b = bounds_args();
    b.pop();
    b.pop();
    b.extend(["--use-spectrum", "spec.json", "--emit", "json"]);
    let with = serde_json::from_str::<Value>(&ok(dir.path(), &b)).unwrap();
    let without = json(dir.path(), &bounds_args()[..bounds_args().len() - 2]);
    let z = |v: &Value| v["result"]["reports"][0]["zeta"].as_f64().unwrap();
    assert!(z(&with) < 1.0 && z(&with) > 0.8);
    assert_eq!(z(&without), 1.0);

    let mut wrong = bounds_args();
    wrong[4] = "30";
    wrong.pop();
    wrong.pop();
    wrong.extend(["--use-spectrum", "spec.json"]);
    assert_eq!(bandcap(dir.path(), &wrong).status.code(), Some(2));
}

#[test]
fn oracle_counts_interval_packing() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(
        dir.path(),
        &["oracle", "--eps", "0.25", "--radius", "1", "--mode", "pack"],
    );
    assert_eq!(v["result"]["count"], 5);
    let v = json(
        dir.path(),
        &[
            "oracle", "--eps", "0.25", "--radius", "1", "--mode", "cover",
        ],
    );
    assert_eq!(v["result"]["count"], 4);
    let v = json(
        dir.path(),
        &[
            "oracle", "--dim", "2", "--eps", "0.5", "--radius", "1", "--mode", "pack",
        ],
    );
    assert!(v["result"]["count"].as_u64().unwrap() >= 1);
    let out = bandcap(
        dir.path(),
        &[
            "oracle", "--dim", "2", "--eps", "0.5", "--radius", "1", "--mode", "cover",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
}
