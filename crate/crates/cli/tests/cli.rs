use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use itertools::Itertools;
use serde_json::Value;
use tempfile::TempDir;

fn sqgt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqgt"))
        .args(args)
        .env_remove("SQGT_LOG")
        .output()
        .expect("spawn sqgt")
}

fn ok(args: &[&str]) -> String {
    let out = sqgt(args);
    assert!(
        out.status.success(),
        "sqgt {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn construct_concat_identity_five() {
    let dir = TempDir::new().unwrap();
    let code = path(&dir, "code.json");
    let out = sqgt(&[
        "construct",
        "--mode",
        "concat",
        "--base",
        "id:5",
        "--q",
        "4",
        "--eta",
        "1",
        "--u",
        "2",
        "-o",
        s(&code),
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("N=10"));
    let v = json(&fs::read_to_string(&code).unwrap());
    assert_eq!(v["N"], 10);
    assert_eq!(v["n"], 5);
    assert_eq!(v["K"], 2);
    assert_eq!(v["q"], 4);
}

#[test]
fn construct_scale_from_csv() {
    let dir = TempDir::new().unwrap();
    let base = path(&dir, "base.csv");
    fs::write(&base, "1,0,0\n0,1,0\n0,0,1\n1,1,0\n").unwrap();
    let v = json(&ok(&[
        "construct",
        "--mode",
        "scale",
        "--base",
        s(&base),
        "--factor",
        "3",
    ]));
    assert_eq!(v["q"], 4);
    assert_eq!(v["matrix"][3], serde_json::json!([3, 3, 0]));

    let csv = ok(&[
        "construct",
        "--mode",
        "scale",
        "--base",
        s(&base),
        "--factor",
        "3",
        "--format",
        "csv",
    ]);
    assert_eq!(csv, "3,0,0\n0,3,0\n0,0,3\n3,3,0\n");
}

#[test]
fn construct_rejects_step_above_alphabet() {
    let out = sqgt(&[
        "construct",
        "--mode",
        "concat",
        "--base",
        "id:3",
        "--q",
        "3",
        "--eta",
        "3",
        "--u",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(err.trim().lines().count(), 1, "{err}");

    let out = sqgt(&[
        "construct",
        "--mode",
        "scale",
        "--base",
        "id:3",
        "--factor",
        "4",
        "--q",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_syndrome_examples() {
    let dir = TempDir::new().unwrap();
    let scaled = path(&dir, "scaled.json");
    ok(&[
        "construct",
        "--mode",
        "scale",
        "--base",
        "id:3",
        "--factor",
        "3",
        "-o",
        s(&scaled),
    ]);

    let empty = json(&ok(&[
        "simulate",
        "--code",
        s(&scaled),
        "--positives",
        "",
        "--eta",
        "1",
        "--u",
        "1",
    ]));
    assert_eq!(empty["outcomes"], serde_json::json!([0, 0, 0]));

    let one = json(&ok(&[
        "simulate",
        "--code",
        s(&scaled),
        "--positives",
        "1",
        "--eta",
        "1",
        "--u",
        "1",
    ]));
    assert_eq!(one["outcomes"], serde_json::json!([0, 3, 0]));

    let small = path(&dir, "small.csv");
    fs::write(&small, "1,1\n2,1\n").unwrap();
    let quant = path(&dir, "quant.json");
    fs::write(&quant, r#"{"Q": 3, "thresholds": [2, 3]}"#).unwrap();
    let y = json(&ok(&[
        "simulate",
        "--code",
        s(&small),
        "--positives",
        "0,1",
        "--quantizer",
        s(&quant),
    ]));
    assert_eq!(y["outcomes"], serde_json::json!([1, 2]));
    assert_eq!(y["Q"], 3);
}

#[test]
fn simulate_rejects_bad_indices() {
    let dir = TempDir::new().unwrap();
    let code = path(&dir, "code.json");
    ok(&[
        "construct",
        "--mode",
        "scale",
        "--base",
        "id:3",
        "--factor",
        "1",
        "-o",
        s(&code),
    ]);
    let out = sqgt(&[
        "simulate",
        "--code",
        s(&code),
        "--positives",
        "3",
        "--eta",
        "1",
        "--u",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = sqgt(&[
        "simulate",
        "--code",
        s(&code),
        "--positives",
        "1,1",
        "--eta",
        "1",
        "--u",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = sqgt(&[
        "simulate",
        "--code",
        s(&code),
        "--positives",
        "x",
        "--eta",
        "1",
        "--u",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

fn round_trip_all(q: &str, eta: &str, base: &str) {
    let dir = TempDir::new().unwrap();
    let code = path(&dir, "code.json");
    let y = path(&dir, "y.json");
    ok(&[
        "construct",
        "--mode",
        "concat",
        "--base",
        base,
        "--q",
        q,
        "--eta",
        eta,
        "--u",
        "2",
        "-o",
        s(&code),
    ]);
    let subjects = json(&fs::read_to_string(&code).unwrap())["N"]
        .as_u64()
        .unwrap() as usize;
    for size in 0..=2 {
        for set in (0..subjects).combinations(size) {
            let list = set.iter().join(",");
            ok(&[
                "simulate",
                "--code",
                s(&code),
                "--positives",
                &list,
                "-o",
                s(&y),
            ]);
            let decoded = json(&ok(&[
                "decode",
                "--code",
                s(&code),
                "--outcome",
                s(&y),
                "--mode",
                "concat",
            ]));
            assert_eq!(
                decoded["positives"],
                serde_json::json!(set),
                "q={q} eta={eta} {base}"
            );
            assert_eq!(decoded["consistent"], true);
        }
    }
}

#[test]
fn decode_round_trips_construct_examples() {
    round_trip_all("4", "1", "id:3");
    round_trip_all("2", "1", "id:3");
    round_trip_all("9", "2", "id:4");
}

#[test]
fn naive_decode_of_scaled_code() {
    let dir = TempDir::new().unwrap();
    let code = path(&dir, "code.json");
    let y = path(&dir, "y.json");
    ok(&[
        "construct",
        "--mode",
        "scale",
        "--base",
        "id:5",
        "--factor",
        "3",
        "-o",
        s(&code),
    ]);
    ok(&[
        "simulate",
        "--code",
        s(&code),
        "--positives",
        "4,0",
        "--eta",
        "2",
        "--u",
        "2",
        "-o",
        s(&y),
    ]);
    let decoded = json(&ok(&[
        "decode",
        "--code",
        s(&code),
        "--outcome",
        s(&y),
        "--eta",
        "2",
        "--u",
        "2",
    ]));
    assert_eq!(decoded["positives"], serde_json::json!([0, 4]));
    assert_eq!(decoded["consistent"], true);
}

#[test]
fn inconsistent_outcome_exits_zero_with_flag() {
    let dir = TempDir::new().unwrap();
    let code = path(&dir, "code.json");
    let y = path(&dir, "y.json");
    ok(&[
        "construct",
        "--mode",
        "concat",
        "--base",
        "id:5",
        "--q",
        "4",
        "--u",
        "2",
        "-o",
        s(&code),
    ]);
    fs::write(&y, r#"{"Q": 7, "outcomes": [6, 6, 6, 6, 6]}"#).unwrap();
    for mode in ["naive", "concat"] {
        let out = sqgt(&[
            "decode",
            "--code",
            s(&code),
            "--outcome",
            s(&y),
            "--mode",
            mode,
        ]);
        assert_eq!(out.status.code(), Some(0));
        let v = json(&String::from_utf8(out.stdout).unwrap());
        assert_eq!(v["consistent"], false, "{mode}");
    }
}

#[test]
fn concat_decode_needs_concat_file() {
    let dir = TempDir::new().unwrap();
    let code = path(&dir, "code.json");
    let y = path(&dir, "y.json");
    ok(&[
        "construct",
        "--mode",
        "scale",
        "--base",
        "id:3",
        "--factor",
        "1",
        "-o",
        s(&code),
    ]);
    fs::write(&y, r#"{"outcomes": [0, 0, 0]}"#).unwrap();
    let out = sqgt(&[
        "decode",
        "--code",
        s(&code),
        "--outcome",
        s(&y),
        "--mode",
        "concat",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_reports_witness() {
    let dir = TempDir::new().unwrap();
    let good = path(&dir, "good.json");
    ok(&[
        "construct",
        "--mode",
        "scale",
        "--base",
        "id:4",
        "--factor",
        "2",
        "-o",
        s(&good),
    ]);
    let v = json(&ok(&[
        "check",
        "--code",
        s(&good),
        "--u",
        "3",
        "--eta",
        "2",
    ]));
    assert_eq!(v["disjunct"], true);
    assert!(v["witness"].is_null());

    let binary = path(&dir, "binary.json");
    ok(&[
        "construct",
        "--mode",
        "scale",
        "--base",
        "id:4",
        "--factor",
        "1",
        "-o",
        s(&binary),
    ]);
    let v = json(&ok(&[
        "check",
        "--code",
        s(&binary),
        "--u",
        "1",
        "--eta",
        "2",
        "--levels",
        "2",
    ]));
    assert_eq!(v["disjunct"], false);
    assert_eq!(v["witness"]["codeword"], 0);
    assert_eq!(v["witness"]["covering"], serde_json::json!([1]));
}

#[test]
fn capacity_single_positive_row() {
    let csv = ok(&["capacity", "--m", "1", "--q", "2", "--levels", "2"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("m,alpha_bits,p0,p1,partition"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "1");
    assert!((row[1].parse::<f64>().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(row[4], "{0}{1}");
}

#[test]
fn capacity_eval_only_at_reference_point() {
    let out = ok(&[
        "capacity",
        "--m",
        "2",
        "--eval-only",
        "--pt",
        "0.33,0.34,0.33",
        "--partition",
        "{0,1}{2}{3,4}",
        "--format",
        "json",
    ]);
    let v = json(&out);
    let row = &v[0];
    assert_eq!(row["partition"], "{0,1}{2}{3,4}");
    let alpha = row["alpha_bits"].as_f64().unwrap();
    assert!(alpha > 0.0 && alpha.is_finite());
    let per_i = row["per_i"].as_array().unwrap();
    assert_eq!(per_i.len(), 2);
    let min = per_i
        .iter()
        .enumerate()
        .map(|(k, v)| v.as_f64().unwrap() / (k + 1) as f64)
        .fold(f64::INFINITY, f64::min);
    assert!((alpha - min).abs() < 1e-12);

    let out = sqgt(&[
        "capacity",
        "--m",
        "2",
        "--eval-only",
        "--pt",
        "0.33,0.34,0.33",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn capacity_range_has_one_row_per_m() {
    let csv = ok(&[
        "capacity",
        "--m",
        "2",
        "--m-max",
        "3",
        "--q",
        "3",
        "--levels",
        "3",
        "--grid-step",
        "0.05",
        "--no-refine",
    ]);
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("2,") && rows[1].starts_with("3,"));
}

#[test]
fn critical_rate_examples() {
    let v = json(&ok(&[
        "critical-rate",
        "--q",
        "2",
        "--eta",
        "1",
        "--u",
        "1",
        "--n",
        "100",
        "--eps",
        "1",
    ]));
    assert_eq!(v["A"], 3);
    assert!((v["asymptotic_rate"].as_f64().unwrap() - 0.5 * (4.0f64 / 3.0).log2()).abs() < 1e-12);

    let v = json(&ok(&[
        "critical-rate",
        "--q",
        "2",
        "--eta",
        "2",
        "--u",
        "1",
        "--n",
        "100",
    ]));
    assert_eq!(v["gamma"], 1.0);
    assert_eq!(v["asymptotic_rate"], 0.0);

    let v = json(&ok(&[
        "critical-rate",
        "--q",
        "4",
        "--eta",
        "1",
        "--u",
        "2",
        "--n",
        "100",
        "--eps",
        "0.01",
    ]));
    let brute = (0..64u32)
        .filter(|r| {
            let (a, b, c) = (r % 4, (r / 4) % 4, r / 16);
            a <= b + c
        })
        .count();
    assert_eq!(v["A"], brute);
}

#[test]
fn monte_carlo_csv_and_guards() {
    let csv = ok(&[
        "mc", "--n", "4", "--N", "1", "--q", "2", "--u", "1", "--trials", "5", "--seed", "3",
    ]);
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "trial,disjunct,witness");
    assert_eq!(rows.len(), 6);
    assert!(rows[1..].iter().all(|r| r.ends_with(",true,")));

    let csv = ok(&[
        "mc",
        "--n",
        "10",
        "--subjects",
        "512",
        "--q",
        "2",
        "--u",
        "1",
        "--trials",
        "3",
        "--seed",
        "3",
    ]);
    assert!(csv.lines().skip(1).all(|r| r.contains(",false,")));

    let out = sqgt(&[
        "mc",
        "--n",
        "4",
        "--N",
        "400",
        "--q",
        "2",
        "--u",
        "3",
        "--trials",
        "1",
        "--max-work",
        "1000",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(sqgt(&["check"]).status.code(), Some(2));
    assert_eq!(sqgt(&["nonsense"]).status.code(), Some(2));
    assert_eq!(
        sqgt(&[
            "critical-rate",
            "--q",
            "1",
            "--eta",
            "1",
            "--u",
            "1",
            "--n",
            "5"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn log_level_env_is_accepted() {
    let out = Command::new(env!("CARGO_BIN_EXE_sqgt"))
        .args([
            "critical-rate",
            "--q",
            "3",
            "--eta",
            "1",
            "--u",
            "1",
            "--n",
            "10",
        ])
        .env("SQGT_LOG", "debug")
        .output()
        .unwrap();
    assert!(out.status.success());
}
