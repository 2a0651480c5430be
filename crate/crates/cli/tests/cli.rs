use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn freemax(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_freemax"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("FREEMAX_THREADS", t),
        None => cmd.env_remove("FREEMAX_THREADS"),
    };
    cmd.output().unwrap()
}

fn ok_json(args: &[&str]) -> Value {
    let out = freemax(args, None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn error_of(args: &[&str]) -> (i32, String) {
    let out = freemax(args, None);
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    let code = err["error"]["code"].as_str().unwrap().to_string();
    assert_eq!(err["error"]["exit_status"].as_i64().unwrap() as i32, out.status.code().unwrap());
    (out.status.code().unwrap(), code)
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn uniform_iterates_are_exactly_type_three() {
    let doc = ok_json(&[
        "iterate", "--law", r#"{"kind":"Uniform"}"#, "--type", "III", "--alpha", "1", "--n",
        "2,10,1000000",
    ]);
    let rows = doc["payload"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for (r, n) in rows.iter().zip([2.0, 10.0, 1e6]) {
        assert!(r["sup_distance"].as_f64().unwrap() <= 1e-12);
        assert!((r["a_n"].as_f64().unwrap() - 1.0 / n).abs() < 1e-18);
        assert_eq!(r["b_n"].as_f64().unwrap(), 1.0);
    }
    assert_eq!(doc["metadata"]["command"], "iterate");
    assert_eq!(doc["metadata"]["inputs_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn law_table_csv() {
    let out = freemax(
        &["law", "--law", r#"{"kind":"Uniform"}"#, "--x", "0,0.5,1", "--format", "csv"],
        None,
    );
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "x,F\n0,0\n0.5,0.5\n1,1\n");
}

#[test]
fn tabulated_law_round_trips_through_law_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("t.csv");
    let out = freemax(
        &[
            "law", "--law", r#"{"kind":"FreeTypeII","shape":2}"#, "--grid-points", "201",
            "--format", "csv", "--out", table.to_str().unwrap(),
        ],
        None,
    );
    assert!(out.status.success());
    let doc = ok_json(&["law", "--law", table.to_str().unwrap(), "--x", "1,2,4"]);
    let f: Vec<f64> = doc["payload"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["F"].as_f64().unwrap())
        .collect();
    // Piecewise-linear interpolation of a concave CDF lies below it, within
    // the rise over one grid cell.
    for (got, x) in f.iter().zip([1.0f64, 2.0, 4.0]) {
        let exact = 1.0 - x.powi(-2);
        assert!(*got <= exact + 1e-12 && exact - got < 0.05, "{x}: {got} vs {exact}");
    }
}

#[test]
fn free_max_conv_of_uniforms() {
    let doc = ok_json(&[
        "conv", "--law", r#"{"kind":"Uniform"}"#, "--law", r#"{"kind":"Uniform"}"#, "--x",
        "0.25,0.5,0.75",
    ]);
    let h: Vec<f64> = doc["payload"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["H"].as_f64().unwrap())
        .collect();
    assert_eq!(h, vec![0.0, 0.0, 0.5]);
}

#[test]
fn homomorphism_rows_are_exact() {
    let doc = ok_json(&["conv", "--homomorphism", "--c", "0.5,2", "--grid-points", "201"]);
    let rows = doc["payload"].as_array().unwrap();
    assert_eq!(rows.len(), 7 + 2 * 55);
    for r in rows {
        assert!(r["sup_distance"].as_f64().unwrap() <= 1e-12, "{r}");
    }
}

#[test]
fn gumbel_is_not_free_stable() {
    let doc = ok_json(&["stable", "--law", r#"{"kind":"ClassicalGumbel"}"#, "--k", "2"]);
    let r = &doc["payload"][0];
    assert_eq!(r["stable"], false);
    assert!(r["minimized_sup_distance"].as_f64().unwrap() > 1e-3);
}

#[test]
fn free_types_are_fixed_points() {
    let doc = ok_json(&["stable", "--type", "I,II,III", "--alpha", "0.5,2", "--n", "2,1e6"]);
    let rows = doc["payload"].as_array().unwrap();
    assert_eq!(rows.len(), 12);
    for r in rows {
        assert!(r["sup_distance"].as_f64().unwrap() <= 1e-10, "{r}");
    }
}

#[test]
fn pot_fits_sample_file_above_threshold() {
    let dir = tempfile::tempdir().unwrap();
    // Evenly spaced values: the 200 exceedances over 2 are uniform, a
    // bounded law, so the fitted index is negative.
    let body: String = (1..=400).map(|i| format!("{}\n", i as f64 * 0.01)).collect();
    let path = write(dir.path(), "data.csv", &body);
    let doc = ok_json(&["pot", "--samples", &path, "--u", "2.0"]);
    assert_eq!(doc["payload"]["n_exceedances"], 200);
    assert!(doc["payload"]["gamma_hat"].as_f64().unwrap() < 0.0);
}

#[test]
fn pot_draws_need_a_seed_and_are_reproducible() {
    let args = ["pot", "--law", r#"{"kind":"GeneralizedPareto","shape":0.5}"#, "--draws", "20000"];
    assert_eq!(error_of(&args).1, "missing_seed");
    let mut seeded = args.to_vec();
    seeded.extend(["--seed", "3"]);
    let a = ok_json(&seeded);
    let b = ok_json(&seeded);
    assert_eq!(a, b);
    assert!((a["payload"]["gamma_hat"].as_f64().unwrap() - 0.5).abs() < 0.1);
}

#[test]
fn spectral_max_of_commuting_diagonals() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.csv", "3,0\n0,1\n");
    let b = write(dir.path(), "b.csv", "2,0\n0,2\n");
    let doc = ok_json(&["spectral", "max", "--a", &a, "--b", &b, "--matrix"]);
    let m: Vec<Vec<f64>> = serde_json::from_value(doc["payload"].clone()).unwrap();
    let expected = [[3.0, 0.0], [0.0, 2.0]];
    for (row, want) in m.iter().zip(expected) {
        for (x, y) in row.iter().zip(want) {
            assert!((x - y).abs() < 1e-12);
        }
    }
    let doc = ok_json(&["spectral", "leq", "--a", &a, "--b", &b]);
    assert_eq!(doc["payload"]["leq"], false);
}

#[test]
fn general_position_ranks_are_exact() {
    let doc = ok_json(&[
        "spectral", "general-position", "--N", "20", "--ranks", "5,12", "--trials", "8", "--seed",
        "4",
    ]);
    for r in doc["payload"].as_array().unwrap() {
        assert_eq!(r["holds"], true);
        assert_eq!(r["rank_join"], r["expected_join"]);
        assert_eq!(r["rank_meet"], r["expected_meet"]);
    }
}

#[test]
fn poisson_report_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let part = write(
        dir.path(),
        "part.json",
        r#"{"atoms":[{"id":1,"mass":0.25},{"id":2,"mass":0.5}]}"#,
    );
    let args = [
        "poisson", "--partition", &part, "--subsets", "1;2;1,2", "--N", "64", "--trials", "6",
        "--seed", "7",
    ];
    let one = freemax(&args, Some("1"));
    let four = freemax(&args, Some("4"));
    assert!(one.status.success(), "{}", String::from_utf8_lossy(&one.stderr));
    assert_eq!(one.stdout, four.stdout);
    let doc: Value = serde_json::from_slice(&one.stdout).unwrap();
    let recs = doc["payload"]["records"].as_array().unwrap();
    assert_eq!(recs.len(), 3);
    assert_eq!(recs[2]["join_additivity_ok"], true);
    assert!(recs[0]["join_additivity_ok"].is_null());
    assert_eq!(doc["metadata"]["seed"], 7);
}

#[test]
fn eigenvalue_dump_matches_the_rank() {
    let dir = tempfile::tempdir().unwrap();
    let part = write(dir.path(), "part.json", r#"{"atoms":[{"id":"a","mass":0.25}]}"#);
    let dump = dir.path().join("eig");
    let out = freemax(
        &[
            "poisson", "--partition", &part, "--N", "40", "--seed", "1", "--dump-eigenvalues",
            dump.to_str().unwrap(),
        ],
        None,
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(dump.join("pi_a.csv")).unwrap();
    let lambdas: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(lambdas.len(), 40);
    assert_eq!(lambdas.iter().filter(|&&x| x > 1e-8).count(), 10);
}

#[test]
fn errors_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    let bad = write(dir.path(), "bad.json", "{ not json");
    let cases: Vec<(Vec<&str>, i32, &str)> = vec![
        (vec!["frobnicate"], 2, "usage"),
        (
            vec!["poisson", "--partition", missing.to_str().unwrap(), "--N", "50", "--seed", "1"],
            3,
            "unreadable_input",
        ),
        (vec!["law", "--law", r#"{"kind":"FreeTypeII","shape":-1}"#], 4, "invalid_argument"),
        (vec!["law", "--law", r#"{"kind":"Nonsense"}"#], 4, "invalid_argument"),
        (vec!["poisson", "--partition", &bad, "--N", "50", "--seed", "1"], 5, "malformed_input"),
        (vec!["spectral", "identity", "--N", "8"], 6, "missing_seed"),
    ];
    for (args, status, code) in cases {
        assert_eq!(error_of(&args), (status, code.to_string()), "{args:?}");
    }
}

#[test]
fn bad_thread_count_is_rejected() {
    let out = freemax(&["law", "--law", "cauchy", "--x", "0"], Some("zero"));
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn negative_grid_lists_parse() {
    let out = freemax(&["law", "--law", "cauchy", "--x", "-1,0,1", "--format", "csv"], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "x,F\n-1,0.25\n0,0.5\n1,0.75\n");
}
