//! End-to-end runs of the `sstp` binary and the on-disk formats it writes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sstp::output::{parse_series_csv, COMPARISON_HEADER, CSV_HEADER};
use sstp::RunConfig;

fn sstp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sstp"))
        .args(args)
        .env_remove("SSTP_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) -> String {
    let out = sstp(args);
    assert!(
        out.status.success(),
        "sstp {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

const TINY: [&str; 10] = [
    "--preset", "fig2", "--set", "n_traj=6", "--set", "t_max=0.5", "--set", "record_stride=5", "--set",
    "n_modes=20",
];

fn tiny_run(dir: &Path, extra: &[&str]) {
    let mut args = vec!["run"];
    args.extend_from_slice(&TINY);
    args.extend_from_slice(&["--out", dir.to_str().unwrap()]);
    args.extend_from_slice(extra);
    run_ok(&args);
}

#[test]
fn repeat_runs_are_byte_identical_and_thread_independent() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    tiny_run(&a, &["--threads", "1"]);
    tiny_run(&b, &["--threads", "1"]);
    tiny_run(&c, &["--threads", "2"]);
    let read = |d: &Path| fs::read(d.join("observable.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_eq!(read(&a), read(&c));
}

#[test]
fn csv_schema_and_metadata() {
    let tmp = tempfile::tempdir().unwrap();
    tiny_run(tmp.path(), &["--hop-log"]);
    let text = fs::read_to_string(tmp.path().join("observable.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
    let series = parse_series_csv(&text).unwrap();
    assert_eq!(series.len(), 11);
    assert_eq!(series.times[0], 0.0);
    assert!((series.times[10] - 0.5).abs() < 1e-12);
    assert_eq!(series.mean[0], 1.0);
    assert!(series.stderr.iter().all(|x| x.is_finite()));
    for line in text.lines().skip(1) {
        for cell in line.split(',') {
            assert!(cell.contains('e'), "not in scientific notation: {cell}");
        }
    }

    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["n_traj"], 6);
    assert_eq!(meta["runs"][0]["scheme"], "energy-conserving");
    assert!(meta["code_version"].is_string());
    assert!(meta["runs"][0]["hop_stats"]["tests"].as_u64().unwrap() > 0);
    assert_eq!(meta["runs"][0]["hop_stats"]["window_violations"], 0);

    let hops = fs::read_to_string(tmp.path().join("observable.hops.csv")).unwrap();
    assert_eq!(hops.lines().next().unwrap(), "traj,initial_pair,step,side,target,energy_residual");
}

#[test]
fn written_config_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    tiny_run(&first, &[]);
    let conf = first.join("observable.conf");
    let resolved = RunConfig::from_file(&conf).unwrap();
    assert_eq!(resolved.n_traj, 6);
    assert_eq!(resolved.n_modes, 20);

    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(first.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["resolved_config"].as_str().unwrap(), fs::read_to_string(&conf).unwrap());

    let second = tmp.path().join("second");
    run_ok(&["run", "--config", conf.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert_eq!(
        fs::read(first.join("observable.csv")).unwrap(),
        fs::read(second.join("observable.csv")).unwrap()
    );
}

#[test]
fn compare_mode_writes_both_schemes_and_ratio() {
    let tmp = tempfile::tempdir().unwrap();
    tiny_run(tmp.path(), &["--compare", "--primitive-t-max", "0.3"]);
    let prim = parse_series_csv(&fs::read_to_string(tmp.path().join("primitive.csv")).unwrap()).unwrap();
    let ec = parse_series_csv(&fs::read_to_string(tmp.path().join("energy-conserving.csv")).unwrap()).unwrap();
    assert_eq!(prim.len(), 7);
    assert_eq!(ec.len(), 11);
    assert!(tmp.path().join("primitive.conf").exists());
    assert!(tmp.path().join("energy-conserving.conf").exists());

    let cmp = fs::read_to_string(tmp.path().join("comparison.csv")).unwrap();
    let mut lines = cmp.lines();
    assert_eq!(lines.next().unwrap(), COMPARISON_HEADER);
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 7);
    for (k, row) in rows.iter().enumerate() {
        assert_eq!(row[0], prim.times[k]);
        assert_eq!(row[1], prim.weight_var[k]);
        assert_eq!(row[2], ec.weight_var[k]);
    }
}

#[test]
fn uncoupled_preset_follows_the_two_level_solution() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().to_str().unwrap();
    run_ok(&["run", "--preset", "uncoupled", "--set", "t_max=5", "--out", dir]);
    let s = parse_series_csv(&fs::read_to_string(tmp.path().join("observable.csv")).unwrap()).unwrap();
    for (t, m) in s.times.iter().zip(&s.mean) {
        assert!((m - (2.0 * t / 3.0).cos()).abs() < 1e-9);
    }
}

#[test]
fn config_subcommand_prints_resolved_keys() {
    let text = run_ok(&["config", "--preset", "fig1", "--set", "seed=5"]);
    let cfg = {
        let mut c = RunConfig::default();
        c.apply_text(&text).unwrap();
        c
    };
    assert_eq!(cfg.seed, 5);
    assert_eq!(cfg.xi, 0.007);
    assert_eq!(cfg.beta, 0.3);
}

#[test]
fn oracle_subcommand_reports_deviation() {
    let text = run_ok(&["oracle", "--preset", "oracle-small", "--set", "n_traj=2000", "--set", "t_max=0.1", "--set", "record_stride=2"]);
    assert!(text.contains("largest deviation"));
    assert_eq!(text.lines().filter(|l| l.starts_with("primitive")).count(), 4);
}

#[test]
fn bad_input_is_rejected_with_a_message() {
    let out = sstp(&["config", "--set", "bogus=1"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bogus") && err.contains("n_traj"), "{err}");

    let out = sstp(&["config", "--preset", "nope"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("fig2"));

    let out = sstp(&["config", "--set", "tau=-1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("tau"));
}
