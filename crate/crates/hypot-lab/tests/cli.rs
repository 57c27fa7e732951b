//! Binary-level tests: flag handling, exit codes, output shapes, and the
//! byte-determinism of emitted files.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hypot-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hypot-lab-test-{}-{tag}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

#[test]
fn single_all_reports_exact_triple() {
    let out = run(&["single", "3", "4", "--algo", "all"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for name in ["julia11", "clib", "naive_unfused", "naive_fused", "corrected_unfused", "corrected_fused"] {
        let line = text.lines().find(|l| l.starts_with(name)).unwrap_or_else(|| panic!("missing {name}"));
        assert!(line.contains("result 5 (0x1.4p+2)"), "{line}");
        assert!(line.contains("ulp +0"), "{line}");
    }
    assert!(text.contains("oracle: 5 (0x1.4p+2)"));
}

#[test]
fn single_accepts_hex_and_prints_hex() {
    let out = run(&["single", "0x1.8p-3", "0", "--algo", "naive_unfused"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("result 0.1875 (0x1.8p-3)"), "{text}");
}

#[test]
fn single_corrected_fused_matches_oracle_on_unit_pair() {
    let out = run(&["single", "1", "1", "--algo", "corrected_fused"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("ulp +0"));
}

#[test]
fn single_infinity_beats_nan() {
    let out = run(&["single", "inf", "nan", "--algo", "naive_fused"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("result inf"), "{text}");
    assert!(text.contains("oracle: n/a"), "{text}");
}

#[test]
fn single_binary32_runs_without_clib() {
    let out = run(&["single", "3", "4", "--algo", "all", "--format", "binary32"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(!text.contains("clib"), "{text}");
    assert!(text.contains("corrected_fused"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["single", "zebra", "1"]).status.code(), Some(2));
    assert_eq!(run(&["single", "1", "1", "--algo", "hypot9000"]).status.code(), Some(2));
    assert_eq!(run(&["single", "1", "1", "--format", "binary128"]).status.code(), Some(2));
    assert_eq!(
        run(&["single", "1", "1", "--algo", "clib", "--format", "binary32"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["table1", "--shards", "0"]).status.code(), Some(2));
    // clap's own parse failures also exit 2
    assert_eq!(run(&["no-such-subcommand"]).status.code(), Some(2));
    assert_eq!(run(&["table2", "--n-list", "0,zebra"]).status.code(), Some(2));
}

#[test]
fn verify_quick_mode_passes() {
    let out = run(&["verify", "--samples", "2000"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.lines().filter(|l| l.starts_with("ok ")).count() >= 8, "{text}");
    assert!(!text.contains("FAIL"), "{text}");
}

#[test]
fn table1_csv_bytes_are_reproducible() {
    let dir_a = temp_dir("t1a");
    let dir_b = temp_dir("t1b");
    let args = ["table1", "--samples", "20000", "--seed", "7"];
    assert!(bin().args(args).arg("--out").arg(&dir_a).output().unwrap().status.success());
    assert!(bin().args(args).arg("--out").arg(&dir_b).arg("--shards").arg("3").output().unwrap().status.success());
    let a = fs::read(dir_a.join("table1.csv")).unwrap();
    let b = fs::read(dir_b.join("table1.csv")).unwrap();
    assert_eq!(a, b, "same flags, same bytes, regardless of shards");
    // the shard env override must not change results either
    let dir_c = temp_dir("t1c");
    let out = bin()
        .args(args)
        .arg("--out")
        .arg(&dir_c)
        .env("HYPOT_LAB_SHARDS", "5")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(fs::read(dir_c.join("table1.csv")).unwrap(), a);
    for d in [dir_a, dir_b, dir_c] {
        let _ = fs::remove_dir_all(d);
    }
}

#[test]
fn table2_emits_expected_files_and_schema() {
    let dir = temp_dir("t2");
    let out = bin()
        .args(["table2", "--n-list", "0,28", "--samples", "5000", "--seed", "3"])
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.join("table2.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n_gap,algorithm,samples,ulp0,ulp1,ulp2,ulp3plus,pct_incorrect"
    );
    assert_eq!(lines.count(), 2 * 6);
    let curve = fs::read_to_string(dir.join("table2_curve.csv")).unwrap();
    assert!(curve.starts_with("n_gap,algorithm,pct_incorrect\n"));
    assert_eq!(curve.lines().count(), 1 + 2 * 6);
    assert!(dir.join("table2_summary.txt").exists());
    // a pct field has exactly 7 decimals
    let row = csv.lines().nth(1).unwrap();
    let pct = row.rsplit(',').next().unwrap();
    assert_eq!(pct.split('.').nth(1).unwrap().len(), 7, "{row}");
    let _ = fs::remove_dir_all(dir);
}

#[test]
fn invalid_shard_env_is_a_usage_error() {
    let dir = temp_dir("envbad");
    let out = bin()
        .args(["table1", "--samples", "100"])
        .arg("--out")
        .arg(&dir)
        .env("HYPOT_LAB_SHARDS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.exists(), "fail-fast: no work, no files");
}

#[test]
fn bench_smoke() {
    let out = run(&["bench", "--samples", "2000", "--reps", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("ns"), "{text}");
    assert!(text.contains("corrected_fused"), "{text}");
}
