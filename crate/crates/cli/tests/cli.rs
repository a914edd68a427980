//! End-to-end tests driving the compiled binary the way a user would.

use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn couponlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_couponlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(args: &[&str]) -> String {
    let out = couponlab(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn exit_code(args: &[&str]) -> i32 {
    couponlab(args).status.code().expect("no signal")
}

/// Parses a CSV body into rows of string cells, header first.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn cell<'a>(rows: &'a [Vec<String>], row: usize, column: &str) -> &'a str {
    let idx = rows[0]
        .iter()
        .position(|h| h == column)
        .unwrap_or_else(|| panic!("no column {column} in {:?}", rows[0]));
    &rows[row][idx]
}

#[test]
fn exact_matches_the_published_scheme_values() {
    let arcs = stdout_of(&["exact", "--n", "10", "--s", "5", "--dist", "arcs"]);
    let rows = csv_rows(&arcs);
    assert_eq!(cell(&rows, 1, "value_exact"), "13/3");

    let rot = stdout_of(&["exact", "--n", "10", "--s", "7", "--dist", "rotation"]);
    let rows = csv_rows(&rot);
    assert_eq!(cell(&rows, 1, "value_exact"), "5/2");

    let uni = stdout_of(&["exact", "--n", "4", "--s", "2"]);
    let rows = csv_rows(&uni);
    assert_eq!(cell(&rows, 1, "value_exact"), "19/5");
    assert_eq!(cell(&rows, 1, "lower_exact"), "25/7");
    assert_eq!(cell(&rows, 1, "upper_exact"), "29/7");
}

#[test]
fn exact_json_carries_both_representations() {
    let text = stdout_of(&["exact", "--n", "4", "--s", "2", "--format", "json"]);
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["value"]["exact"], "19/5");
    let f = v["value"]["float"].as_f64().unwrap();
    assert!((f - 3.8).abs() < 1e-12);
    assert_eq!(v["n"], 4);
    assert_eq!(v["distribution"], "uniform");
}

#[test]
fn exact_uses_float_arithmetic_for_large_n() {
    // E[U_{1000,10}] ~ (n/s) H_n ~ 748; the exact column goes empty
    let text = stdout_of(&["exact", "--n", "1000", "--s", "10"]);
    let rows = csv_rows(&text);
    assert_eq!(cell(&rows, 1, "value_exact"), "");
    let f: f64 = cell(&rows, 1, "value_float").parse().unwrap();
    assert!((700.0..800.0).contains(&f), "{f}");
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("row.csv");
    let on_stdout = stdout_of(&["compare", "--n", "8"]);
    let piped = stdout_of(&["compare", "--n", "8", "--out", path.to_str().unwrap()]);
    assert!(piped.is_empty());
    assert_eq!(fs::read_to_string(&path).unwrap(), on_stdout);
}

#[test]
fn compare_isolates_the_boundary_exception_at_seven() {
    let text = stdout_of(&["compare", "--n", "7"]);
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 6); // header + s in 2..=6
    for r in 1..rows.len() {
        let s: u64 = cell(&rows, r, "s").parse().unwrap();
        let flagged = cell(&rows, r, "boundary_exception") == "true";
        assert_eq!(flagged, s == 3, "s={s}");
    }
}

#[test]
fn compare_shows_the_arcs_window_at_ten() {
    let text = stdout_of(&["compare", "--n", "10"]);
    let rows = csv_rows(&text);
    for r in 1..rows.len() {
        let s: u64 = cell(&rows, r, "s").parse().unwrap();
        match s {
            5..=8 => assert_eq!(cell(&rows, r, "arcs_beats_uniform"), "true", "s={s}"),
            9 => assert_eq!(cell(&rows, r, "arcs_equals_uniform"), "true"),
            _ => assert_eq!(cell(&rows, r, "arcs_beats_uniform"), "", "s={s}"),
        }
    }
}

#[test]
fn simulate_is_reproducible_and_thread_invariant() {
    let args = [
        "simulate", "--dist", "uniform", "--n", "100", "--s", "10", "--trials", "20000",
        "--seed", "7",
    ];
    let first = stdout_of(&args);
    let second = stdout_of(&args);
    assert_eq!(first, second);
    let mut threaded: Vec<&str> = vec!["--threads", "3"];
    threaded.extend_from_slice(&args);
    assert_eq!(stdout_of(&threaded), first);

    let v: Value = serde_json::from_str(&first).unwrap();
    let mean = v["mean"].as_f64().unwrap();
    let se = v["std_error"].as_f64().unwrap();
    let exact = 49.944_566_039_139_9; // uniform recursion at (100, 10)
    assert!((mean - exact).abs() <= 5.0 * se, "mean {mean}, se {se}");
    assert_eq!(v["trials"], 20000);
}

#[test]
fn simulate_rejects_degenerate_requests() {
    assert_eq!(
        exit_code(&[
            "simulate", "--dist", "uniform", "--n", "4", "--s", "2", "--trials", "1",
            "--seed", "1",
        ]),
        2
    );
    // no implicit seeding: reproducibility requires the seed on the command line
    assert_eq!(
        exit_code(&["simulate", "--dist", "uniform", "--n", "4", "--s", "2", "--trials", "100"]),
        2
    );
}

#[test]
fn custom_distribution_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pairs.json");
    fs::write(
        &path,
        r#"{"n": 4, "s": 2, "packages": [
            {"coupons": [1, 2], "prob": "1/2"},
            {"coupons": [3, 4], "prob": "1/2"}
        ]}"#,
    )
    .unwrap();
    let file = path.to_str().unwrap();

    let text = stdout_of(&["exact", "--dist-file", file]);
    let rows = csv_rows(&text);
    assert_eq!(cell(&rows, 1, "value_exact"), "3");

    let sim = stdout_of(&["simulate", "--dist-file", file, "--trials", "5000", "--seed", "3"]);
    let v: Value = serde_json::from_str(&sim).unwrap();
    let mean = v["mean"].as_f64().unwrap();
    assert!((mean - 3.0).abs() <= 5.0 * v["std_error"].as_f64().unwrap());

    // header disagreeing with the file is an error, not a silent override
    assert_eq!(exit_code(&["exact", "--dist-file", file, "--n", "5"]), 2);
}

#[test]
fn optimize_then_verify_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cert.json");
    let file = path.to_str().unwrap();
    stdout_of(&["optimize", "--n", "4", "--s", "2", "--out", file]);

    let report = stdout_of(&["verify", "--file", file]);
    assert!(report.contains("VERIFIED"), "{report}");

    let cert: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(cert["best_value"], "3");
    assert_eq!(cert["improved"], true);
}

#[test]
fn verify_flags_a_tampered_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cert.json");
    let file = path.to_str().unwrap();
    stdout_of(&["optimize", "--n", "4", "--s", "2", "--out", file]);

    let mut cert: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    cert["best_value"] = Value::from("14/5");
    fs::write(&path, serde_json::to_string(&cert).unwrap()).unwrap();

    let out = couponlab(&["verify", "--file", file]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("MISMATCH"));
}

#[test]
fn asymptotics_g_emits_the_requested_grid() {
    let text = stdout_of(&["asymptotics", "g", "--c", "0.5", "--points", "5"]);
    let rows = csv_rows(&text);
    assert_eq!(rows[0], ["c", "x", "g"]);
    assert_eq!(rows.len(), 6);
    let xs: Vec<f64> = (1..6).map(|r| cell(&rows, r, "x").parse().unwrap()).collect();
    assert_eq!(xs, [0.0, 0.2, 0.4, 0.6, 0.8]);
    let gs: Vec<f64> = (1..6).map(|r| cell(&rows, r, "g").parse().unwrap()).collect();
    // g(1/2, .) climbs from ~1.333 at x = 0 toward ~2.333 as x -> 1
    assert!(gs.iter().all(|g| (1.0..3.0).contains(g)), "{gs:?}");
    assert!(gs.windows(2).all(|w| w[0] < w[1]), "{gs:?}");
}

#[test]
fn asymptotics_tables_run_end_to_end() {
    let case1 = stdout_of(&["asymptotics", "case1", "--s", "2", "--n", "100,200"]);
    let rows = csv_rows(&case1);
    assert_eq!(rows.len(), 3);
    for r in 1..3 {
        let d: f64 = cell(&rows, r, "difference").parse().unwrap();
        assert!(d.abs() < 2.0, "{d}");
    }

    let case2 = stdout_of(&["asymptotics", "case2", "--c", "0.5", "--n", "1024"]);
    let rows = csv_rows(&case2);
    let d: f64 = cell(&rows, 1, "difference").parse().unwrap();
    assert!(d.abs() < 0.1, "{d}");

    let case3 = stdout_of(&["asymptotics", "case3", "--t", "2", "--lambda", "1", "--n", "2000"]);
    let rows = csv_rows(&case3);
    let p_limit: f64 = cell(&rows, 1, "p_limit").parse().unwrap();
    let p_exact: f64 = cell(&rows, 1, "p_exact").parse().unwrap();
    assert!((p_limit - p_exact).abs() < 0.05);

    let gumbel = stdout_of(&[
        "asymptotics", "gumbel", "--n", "2000", "--s", "1", "--trials", "4000",
        "--seed", "5", "--x", "0,1",
    ]);
    let rows = csv_rows(&gumbel);
    assert_eq!(rows.len(), 3);
    for r in 1..3 {
        let d: f64 = cell(&rows, r, "difference").parse().unwrap();
        assert!(d.abs() < 0.1, "{d}");
    }
}

#[test]
fn bad_arguments_exit_with_code_two() {
    assert_eq!(exit_code(&["exact", "--n", "3", "--s", "5"]), 2);
    assert_eq!(exit_code(&["exact", "--n", "4", "--s", "2", "--dist", "bogus"]), 2);
    assert_eq!(exit_code(&["compare", "--n", "1"]), 2);
    assert_eq!(exit_code(&["optimize", "--n", "40", "--s", "2"]), 2);
    assert_eq!(exit_code(&["asymptotics", "g", "--c", "1.5"]), 2);
}

#[test]
fn exact_computation_ignores_the_thread_count() {
    let base = stdout_of(&["compare", "--n", "11"]);
    let threaded = stdout_of(&["--threads", "2", "compare", "--n", "11"]);
    assert_eq!(base, threaded);
}
