use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn filmspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_filmspec"))
        .args(args)
        .env_remove("FILM_SPECTRUM_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

#[test]
fn eigenpoly_prints_exact_polynomial() {
    let o = filmspec(&["eigenpoly", "--n", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("s^3 - 3 s^2 + 3/2 s"));

    let o = filmspec(&["eigenpoly", "--n", "4", "--format", "csv"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,coefficient,coefficient_f64,gram_with_f_r"));
    assert_eq!(lines.next(), Some("1,-3,-3,0"));
}

#[test]
fn invalid_config_is_rejected_before_any_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("spec.csv");
    let o = filmspec(&[
        "spectrum",
        "--eps",
        "1.5",
        "--format",
        "csv",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("eps"));
    assert!(!out.exists());

    assert_eq!(filmspec(&["converge", "--eps-list", "0.1,0.2"]).status.code(), Some(3));
    assert_eq!(
        filmspec(&["spectrum", "--eps", "0.2", "--nodes", "10"]).status.code(),
        Some(3)
    );
    assert_eq!(
        filmspec(&["hsnorm", "--eps", "0.2", "--tol", "1e-7"]).status.code(),
        Some(3)
    );
    assert_eq!(filmspec(&["spectrum", "--no-such-flag"]).status.code(), Some(3));
}

#[test]
fn spectrum_both_routes_table_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = filmspec(&[
            "spectrum",
            "--eps",
            "0.1",
            "--n-max",
            "5",
            "--route",
            "both",
            "--format",
            "csv",
            "--output",
            p.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());

    let mut rdr = csv::Reader::from_reader(bytes.as_slice());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        ["n", "lambda", "mu", "route", "reliable", "gap_to_n", "rel_gap", "agree"]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 5);
    for r in &rows {
        assert_eq!(&r[7], "true");
        let lambda: f64 = r[1].parse().unwrap();
        let mu: f64 = r[2].parse().unwrap();
        assert!((mu - (1.0 - 1.0 / lambda)).abs() < 1e-15);
    }
    let first: f64 = rows[0][1].parse().unwrap();
    assert!((first - 1.0096792936).abs() < 1e-9);

    let meta = read_json(&dir.path().join("a.csv.meta.json"));
    assert_eq!(meta["schema_version"], 1);
    assert_eq!(meta["config"]["args"]["route"], "both");
}

#[test]
fn json_document_embeds_config_and_versions() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_filmspec"))
        .args([
            "spectrum", "--limit", "--route", "exact", "--n-max", "4", "--format", "json",
        ])
        .env("FILM_SPECTRUM_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let doc = read_json(&dir.path().join("spectrum.json"));
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["artifact_version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(doc["config"]["command"], "spectrum");
    assert_eq!(doc["config"]["args"]["n_max"], 4);
    assert_eq!(doc["error"], Value::Null);
    assert_eq!(doc["result"]["eigenvalues"], serde_json::json!([1.0, 2.0, 3.0, 4.0]));
}

#[test]
fn compute_errors_land_in_the_error_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("err.json");
    let o = filmspec(&[
        "spectrum",
        "--limit",
        "--route",
        "nystrom",
        "--n-max",
        "500",
        "--nodes",
        "64",
        "--trunc",
        "2000",
        "--format",
        "json",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let doc = read_json(&out);
    assert_eq!(doc["status"], "failure");
    assert!(doc["error"]["message"].as_str().unwrap().contains("nodes"));
    assert_eq!(doc["result"], Value::Null);
}

#[test]
fn reliability_shortfall_exits_with_two() {
    let o = filmspec(&[
        "spectrum", "--eps", "0.2", "--route", "nystrom", "--n-max", "20", "--nodes", "200", "--format", "csv",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 21);
    assert!(text.lines().last().unwrap().contains(",false,"));
}

#[test]
fn hsnorm_limit_matches_basel_sum() {
    let o = filmspec(&["hsnorm", "--limit", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    let v = doc["result"]["limit"]["value"].as_f64().unwrap();
    assert!((v - 1.644934).abs() < 1e-4);
    assert!(doc["result"]["weighted"]["direct"].as_f64().unwrap() <= 5.0);
}

#[test]
fn audit_reports_non_positive_margin() {
    let o = filmspec(&["audit", "--eps", "0.3", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(doc["result"]["pointwise_margin"].as_f64().unwrap() <= 0.0);
    assert_eq!(doc["result"]["audit_outer"]["holds"], true);
}

#[test]
fn single_eps_sweep_notes_skipped_extrapolation() {
    let o = filmspec(&[
        "converge",
        "--eps-list",
        "0.3",
        "--n-max",
        "2",
        "--nodes",
        "128",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    let notes = doc["result"]["notes"].as_array().unwrap();
    assert!(notes
        .iter()
        .any(|n| n.as_str().unwrap().contains("extrapolation skipped")));
    assert_eq!(doc["result"]["table"].as_array().unwrap().len(), 2);
}

#[test]
fn selftest_passes_quickly() {
    let t = std::time::Instant::now();
    let o = filmspec(&["selftest", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(t.elapsed().as_secs() < 60);
    assert!(stdout(&o).lines().skip(1).all(|l| l.split(',').nth(1) == Some("true")));
}
