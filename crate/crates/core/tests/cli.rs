//! End-to-end checks of the `fedbandit` binary: exit codes, file layout and
//! byte-level stability of the CSV output.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_fedbandit");
const TRACE_HEADER: &str =
    "t,cumulative_regret,episode,lambda_k,beta_k,norm_E_k,norm_e_k,theta_error,min_eig_Lambda,dp_noise_norm";

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
}

fn fedbandit(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    fedbandit(&args)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn minimal_run_writes_one_row_per_step() {
    let dir = TempDir::new().unwrap();
    let o = run(&config("minimal.json"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("minimal_rep0.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(TRACE_HEADER));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 64);
    assert!(rows[0].starts_with("1,"));
    assert!(rows[63].starts_with("64,"));
    assert!(dir.path().join("summary.csv").exists());
}

#[test]
fn alpha_at_or_above_half_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let o = run(
        &config("minimal.json"),
        dir.path(),
        &["--override", "attack.alpha=0.6"],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("alpha < 1/2"), "{}", stderr(&o));
}

#[test]
fn unknown_keys_and_missing_files_are_config_errors() {
    let dir = TempDir::new().unwrap();
    let o = run(
        &config("minimal.json"),
        dir.path(),
        &["--override", "environment.colour=1"],
    );
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let o = run(&dir.path().join("absent.json"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let o = run(
        &config("minimal.json"),
        dir.path(),
        &["--override", "no-equals-sign"],
    );
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn same_seed_override_gives_identical_bytes() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for dir in [&a, &b] {
        let o = run(
            &config("minimal.json"),
            dir.path(),
            &["--override", "seed=7", "--jobs", "2"],
        );
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for file in ["minimal_rep0.csv", "summary.csv"] {
        assert_eq!(
            fs::read(a.path().join(file)).unwrap(),
            fs::read(b.path().join(file)).unwrap()
        );
    }
    let c = TempDir::new().unwrap();
    run(&config("minimal.json"), c.path(), &["--override", "seed=8"]);
    assert_ne!(
        fs::read(a.path().join("minimal_rep0.csv")).unwrap(),
        fs::read(c.path().join("minimal_rep0.csv")).unwrap()
    );
}

#[test]
fn golden_trace_is_stable() {
    let dir = TempDir::new().unwrap();
    let o = run(&config("minimal.json"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let produced = fs::read_to_string(dir.path().join("minimal_rep0.csv")).unwrap();
    let golden = include_str!("golden/minimal_rep0.csv");
    assert_eq!(produced, golden);
}

#[test]
fn summary_matches_last_row_of_each_repetition() {
    let dir = TempDir::new().unwrap();
    let o = run(
        &config("minimal.json"),
        dir.path(),
        &["--override", "repetitions=3"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let finals: Vec<f64> = (0..3)
        .map(|j| {
            let csv = fs::read_to_string(dir.path().join(format!("minimal_rep{j}.csv"))).unwrap();
            let last = csv.lines().last().unwrap();
            last.split(',').nth(1).unwrap().parse().unwrap()
        })
        .collect();
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(
        lines.next(),
        Some("config_id,repetitions,mean_final_regret,std_final_regret,failures")
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[1], "3");
    let mean: f64 = row[2].parse().unwrap();
    let expected = finals.iter().sum::<f64>() / 3.0;
    assert!(
        (mean - expected).abs() <= 1e-9 * expected.abs().max(1.0),
        "{mean} vs {expected}"
    );
    assert_eq!(row[4], "0");
}

fn write_sweep(dir: &Path, axes: &str) -> PathBuf {
    let spec = format!(
        r#"{{ "base": "{}", "axes": {axes} }}"#,
        config("minimal.json").display()
    );
    let path = dir.join("sweep.json");
    fs::write(&path, spec).unwrap();
    path
}

#[test]
fn two_by_two_sweep_has_four_summary_rows() {
    let dir = TempDir::new().unwrap();
    let spec = write_sweep(
        dir.path(),
        r#"[{ "path": "seed", "values": [1, 2] }, { "path": "oracle.kind", "values": ["mean", "gm"] }]"#,
    );
    let out = dir.path().join("out");
    let o = fedbandit(&[
        "sweep",
        "--config",
        spec.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 4);
    for i in 0..4 {
        assert!(out.join(format!("cell_{i}")).join("run_rep0.csv").exists());
    }
}

#[test]
fn sweep_records_failed_cells_and_continues() {
    let dir = TempDir::new().unwrap();
    let spec = write_sweep(
        dir.path(),
        r#"[{ "path": "attack.alpha", "values": [0.0, 0.6] }]"#,
    );
    let out = dir.path().join("out");
    let o = fedbandit(&[
        "sweep",
        "--config",
        spec.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].ends_with(",0"));
    assert!(rows[1].ends_with(",1"));
}

#[test]
fn empty_axis_list_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let spec = write_sweep(dir.path(), "[]");
    let o = fedbandit(&[
        "sweep",
        "--config",
        spec.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn oracle_check_passes_and_catches_an_injected_bug() {
    let o = fedbandit(&["oracle-check", "--trials", "20"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    let report = String::from_utf8_lossy(&o.stdout);
    assert_eq!(report.lines().filter(|l| l.starts_with("PASS")).count(), 10);

    let o = fedbandit(&["oracle-check", "--trials", "20", "--inject-bug"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stdout)
        .lines()
        .any(|l| l.starts_with("FAIL")));
}

#[test]
fn default_oracle_battery_passes() {
    let o = fedbandit(&["oracle-check"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
}
