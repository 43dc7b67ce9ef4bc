//! End-to-end runs of the real binary: exit codes, output shapes, and
//! determinism guarantees that only hold across whole process invocations.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_parcf"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary should spawn")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout should be utf-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr should be utf-8")
}

/// Shared flags for a small synthetic dataset that runs in milliseconds.
const TINY: &[&str] = &[
    "--format",
    "synthetic",
    "--users",
    "60",
    "--items",
    "30",
    "--clusters",
    "4",
    "--density",
    "0.4",
    "--seed",
    "11",
];

#[test]
fn help_exits_zero_and_lists_the_subcommands() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), &["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for verb in ["eval", "bench", "synth", "split-stats"] {
        assert!(text.contains(verb), "help should mention `{verb}`");
    }
}

#[test]
fn missing_input_file_exits_one_and_names_the_path() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), &["eval", "--data", "no_such_file.dat"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("no_such_file.dat"));
}

#[test]
fn unknown_flag_exits_one() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), &["eval", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bench_without_the_sequential_baseline_exits_one() {
    let dir = TempDir::new().unwrap();
    let mut args = vec!["bench"];
    args.extend_from_slice(TINY);
    args.extend_from_slice(&["--workers", "2,4"]);
    let out = run_in(dir.path(), &args);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("must include 1"));
}

#[test]
fn sparsity_with_multiple_neighborhood_sizes_exits_one() {
    let dir = TempDir::new().unwrap();
    let mut args = vec!["eval"];
    args.extend_from_slice(TINY);
    args.extend_from_slice(&["--sparsity", "0.5,1.0", "--top-n", "5,10"]);
    let out = run_in(dir.path(), &args);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("exactly one --top-n"));
}

#[test]
fn eval_emits_one_row_per_measure_and_neighborhood_size() {
    let dir = TempDir::new().unwrap();
    let mut args = vec!["eval"];
    args.extend_from_slice(TINY);
    args.extend_from_slice(&[
        "--measure",
        "pcc",
        "--top-n",
        "5,10,20,40",
        "--output",
        "report.csv",
    ]);
    let out = run_in(dir.path(), &args);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));

    let report = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines.len(), 1 + 4, "header plus one row per n");
    assert_eq!(
        lines[0],
        "measure,n,mae,precision,recall,f1,tp,fp,fn,tn,n_predictions,fallback_user_mean,fallback_global_mean"
    );
    for (line, n) in lines[1..].iter().zip([5, 10, 20, 40]) {
        assert!(line.starts_with(&format!("pcc,{n},")), "row: {line}");
    }
}

#[test]
fn eval_json_report_is_valid_and_carries_every_field() {
    let dir = TempDir::new().unwrap();
    let mut args = vec!["eval"];
    args.extend_from_slice(TINY);
    args.extend_from_slice(&[
        "--measure",
        "jaccard,cosine",
        "--top-n",
        "5",
        "--output",
        "report.json",
        "--output-format",
        "json",
    ]);
    let out = run_in(dir.path(), &args);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));

    let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let rows: serde_json::Value = serde_json::from_str(&text).expect("report should be valid JSON");
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["measure"], "jaccard");
    assert_eq!(rows[1]["measure"], "cosine");
    for row in rows {
        for key in [
            "n",
            "mae",
            "precision",
            "recall",
            "f1",
            "tp",
            "fp",
            "fn",
            "tn",
            "n_predictions",
            "fallback_neighbors",
            "fallback_user_mean",
            "fallback_global_mean",
        ] {
            assert!(row.get(key).is_some(), "missing key {key}");
        }
    }
}

#[test]
fn synth_is_deterministic_per_seed() {
    let dir = TempDir::new().unwrap();
    let base = &["synth", "--users", "40", "--items", "25", "--clusters", "3"];

    for (file, seed) in [("a.dat", "5"), ("b.dat", "5"), ("c.dat", "6")] {
        let mut args = base.to_vec();
        args.extend_from_slice(&["--seed", seed, "--output", file]);
        assert_eq!(run_in(dir.path(), &args).status.code(), Some(0));
    }

    let a = std::fs::read(dir.path().join("a.dat")).unwrap();
    let b = std::fs::read(dir.path().join("b.dat")).unwrap();
    let c = std::fs::read(dir.path().join("c.dat")).unwrap();
    assert_eq!(a, b, "same seed must reproduce the same file");
    assert_ne!(a, c, "different seeds must diverge");
}

#[test]
fn synth_output_round_trips_through_eval() {
    let dir = TempDir::new().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "synth", "--users", "50", "--items", "25", "--clusters", "4", "--density", "0.5",
            "--seed", "3", "--output", "ratings.dat",
        ],
    );
    assert_eq!(out.status.code(), Some(0));

    let out = run_in(
        dir.path(),
        &[
            "eval", "--data", "ratings.dat", "--format", "dat", "--measure", "cosine", "--top-n",
            "5", "--output", "report.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let report = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert_eq!(report.lines().count(), 2);
}

#[test]
fn split_stats_conserves_the_rating_count() {
    let dir = TempDir::new().unwrap();
    let mut args = vec!["split-stats"];
    args.extend_from_slice(TINY);
    let out = run_in(dir.path(), &args);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));

    let text = stdout(&out);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert_eq!(
        header,
        "n_ratings,n_train,n_test_kept,n_test_dropped,n_users,n_items,duplicate_warnings,global_train_mean"
    );
    let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
    let n_ratings: usize = fields[0].parse().unwrap();
    let n_train: usize = fields[1].parse().unwrap();
    let n_test_kept: usize = fields[2].parse().unwrap();
    let n_test_dropped: usize = fields[3].parse().unwrap();
    assert_eq!(n_train + n_test_kept + n_test_dropped, n_ratings);
    assert_eq!(fields[4], "60");
    assert_eq!(fields[5], "30");
}

#[test]
fn bench_report_shows_unit_baseline_speedup_and_equal_digests() {
    let dir = TempDir::new().unwrap();
    let mut args = vec!["bench"];
    args.extend_from_slice(TINY);
    args.extend_from_slice(&[
        "--measure",
        "jaccard,pcc",
        "--workers",
        "1,2",
        "--repeats",
        "2",
        "--top-n",
        "5",
        "--output",
        "bench.csv",
    ]);
    let out = run_in(dir.path(), &args);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));

    let report = std::fs::read_to_string(dir.path().join("bench.csv")).unwrap();
    let mut lines = report.lines();
    assert_eq!(
        lines.next().unwrap(),
        "measure,workers,wall_ms,speedup,n_test,digest"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4, "2 measures x 2 worker counts");
    for row in &rows {
        if row[1] == "1" {
            assert_eq!(row[3], "1", "baseline speedup must be exactly 1");
        }
        assert_eq!(row[5].len(), 16, "digest is 16 hex chars: {}", row[5]);
    }
    // Both worker counts of a measure must agree on the output digest.
    assert_eq!(rows[0][5], rows[1][5]);
    assert_eq!(rows[2][5], rows[3][5]);
    // Different measures produce different predictions on this dataset.
    assert_ne!(rows[0][5], rows[2][5]);
}

#[test]
fn duplicate_ratings_are_warned_about_on_stderr() {
    let dir = TempDir::new().unwrap();
    std::fs::write(
        dir.path().join("dups.dat"),
        "1::10::4::0\n1::10::2::0\n2::10::3::0\n2::11::5::0\n1::11::1::0\n3::10::4::0\n3::11::2::0\n",
    )
    .unwrap();
    let out = run_in(
        dir.path(),
        &["split-stats", "--data", "dups.dat", "--train-fraction", "0.6"],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("1 duplicate"));
    let body = stdout(&out);
    let row = body.lines().nth(1).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[0], "6", "duplicate collapsed before counting");
    assert_eq!(fields[6], "1", "duplicate_warnings column");
}
