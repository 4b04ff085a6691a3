use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mehist::harness::read_series_csv;
use mehist::oracle::sorted_quantile;
use mehist::{Quantile, StreamSpec};

fn mehist(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mehist"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = mehist(args);
    assert!(
        out.status.success(),
        "mehist {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_writes_the_stream() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mix.txt");
    ok(&[
        "generate",
        "--kind",
        "mixture",
        "--count",
        "500",
        "--seed",
        "4",
        "--out",
        s(&path),
    ]);
    let read = mehist::datagen::read_stream(&path).unwrap();
    assert_eq!(read, StreamSpec::mixture(500, 4).values().unwrap());
    assert!(fs::read_to_string(&path).unwrap().starts_with('#'));
}

#[test]
fn run_truth_matches_sorted_prefixes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    ok(&[
        "run",
        "--algorithm",
        "data-aligned",
        "--bins",
        "20",
        "--synthetic",
        "normal",
        "--count",
        "3000",
        "--seed",
        "11",
        "--quantile",
        "0.9",
        "--out",
        s(&out),
    ]);
    let records = read_series_csv(fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(records.len(), 3000);
    let values = StreamSpec::stationary(3000, 11).values().unwrap();
    let q = Quantile::new(0.9).unwrap();
    for r in records.iter().step_by(97) {
        let mut prefix = values[..r.index as usize].to_vec();
        prefix.sort_by(f64::total_cmp);
        assert_eq!(r.truth, Some(sorted_quantile(&prefix, q).unwrap()));
    }
    let summary = fs::read_to_string(dir.path().join("run_summary.csv")).unwrap();
    assert!(summary.starts_with("estimator,memory,quantile,"));
    assert!(summary.contains("data-aligned(20)"));
}

#[test]
fn run_with_several_quantiles_splits_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p2.csv");
    ok(&[
        "run",
        "--algorithm",
        "p2",
        "--synthetic",
        "mixture",
        "--count",
        "1000",
        "--quantile",
        "0.5",
        "--quantile",
        "0.99",
        "--stride",
        "10",
        "--out",
        s(&out),
    ]);
    for name in ["p2_q0.5.csv", "p2_q0.99.csv"] {
        let records = read_series_csv(fs::File::open(dir.path().join(name)).unwrap()).unwrap();
        assert_eq!(records.len(), 100);
        assert_eq!(records.last().unwrap().index, 1000);
    }
}

#[test]
fn run_without_truth_leaves_fields_empty() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("u.csv");
    ok(&[
        "run",
        "--algorithm",
        "uniform",
        "--synthetic",
        "normal",
        "--count",
        "50",
        "--no-truth",
        "--out",
        s(&out),
    ]);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.lines().nth(1).unwrap().ends_with(",,"));
}

#[test]
fn run_trace_lists_bins() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    ok(&[
        "run",
        "--algorithm",
        "data-aligned",
        "--bins",
        "8",
        "--synthetic",
        "normal",
        "--count",
        "100",
        "--stride",
        "50",
        "--out",
        s(&dir.path().join("r.csv")),
        "--trace",
        s(&trace),
    ]);
    let text = fs::read_to_string(&trace).unwrap();
    assert_eq!(text.lines().next().unwrap(), "index,bin,lower,upper,count");
    assert_eq!(text.lines().count(), 1 + 2 * 8);
}

#[test]
fn compare_tabulates_all_estimators() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp.csv");
    let series = dir.path().join("series");
    let stdout = ok(&[
        "compare",
        "--synthetic",
        "mixture",
        "--count",
        "2000",
        "--out",
        s(&out),
        "--series-dir",
        s(&series),
    ])
    .stdout;
    let table = fs::read_to_string(&out).unwrap();
    assert_eq!(table.lines().count(), 6);
    for name in [
        "data-aligned(100)",
        "interpolated(100)",
        "p2",
        "reservoir(100)",
        "uniform(100)",
    ] {
        assert!(table.contains(name), "{name} missing");
        assert!(String::from_utf8_lossy(&stdout).contains(name));
    }
    assert_eq!(fs::read_dir(&series).unwrap().count(), 5);
}

#[test]
fn compare_from_file_with_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.txt");
    fs::write(&input, "# values\n3\n1\n\n2\n5\n4\n").unwrap();
    let out = dir.path().join("cmp.csv");
    ok(&[
        "compare",
        "--input",
        s(&input),
        "--algorithm",
        "data-aligned:3",
        "--algorithm",
        "reservoir:2",
        "--quantile",
        "0.5",
        "--out",
        s(&out),
    ]);
    let table = fs::read_to_string(&out).unwrap();
    assert!(table.contains("data-aligned(3)") && table.contains("reservoir(2)"));
}

#[test]
fn errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "1\n2\nthree\n").unwrap();
    let out = dir.path().join("x.csv");
    let cases: [&[&str]; 4] = [
        &[
            "run",
            "--algorithm",
            "p2",
            "--input",
            s(&bad),
            "--out",
            s(&out),
        ],
        &[
            "run",
            "--algorithm",
            "p2",
            "--synthetic",
            "normal",
            "--quantile",
            "1.5",
            "--out",
            s(&out),
        ],
        &[
            "run",
            "--algorithm",
            "p2",
            "--synthetic",
            "normal",
            "--count",
            "10",
            "--out",
            s(&out),
            "--trace",
            s(&out),
        ],
        &[
            "compare",
            "--synthetic",
            "normal",
            "--algorithm",
            "nope",
            "--out",
            s(&out),
        ],
    ];
    for args in cases {
        let o = mehist(args);
        assert!(!o.status.success(), "{args:?} should fail");
        assert!(!o.stderr.is_empty());
    }
    let o = mehist(&[
        "run",
        "--algorithm",
        "p2",
        "--input",
        s(&bad),
        "--out",
        s(&out),
    ]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.txt:3:"));
}
