use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_performa"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn golden(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "golden", name].iter().collect();
    std::fs::read_to_string(p).unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn example_goldens() {
    let o = run(&["example", "example-3.1", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), golden("example-3.1.json"));
    let o = run(&["example", "example-E.3"]);
    assert_eq!(stdout(&o), golden("example-E.3.txt"));
    assert!(stdout(&o).contains("-23/96"));
}

#[test]
fn example_utilities_and_csv() {
    let o = run(&["example", "--fixture", "example-4.1"]);
    assert!(stdout(&o).contains("action utilities: 0.5 at a=0, 0.25 at a=1"));
    let o = run(&["example", "example-E.2", "--format", "csv"]);
    let text = stdout(&o);
    assert!(text.starts_with("label,forecast,value,exact,class\n"));
    assert!(text.contains("misreport,(0.4;0.4),-0.21,-21/100,incorrect"));
}

#[test]
fn unknown_fixture_lists_available() {
    let o = run(&["example", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("unknown fixture `nope`") && err.contains("example-E.3"), "{err}");
}

#[test]
fn surface_writes_csv_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig4.csv");
    let o = run(&["surface", "--fixture", "example-3.1", "--metric", "brier_score", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 1 + 201 * 201);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fig4.report.json")).unwrap()).unwrap();
    assert_eq!(report["observationally_strictly_proper"], true);
    assert_eq!(report["counterfactually_proper"], false);
    assert_eq!(report["optimum"], -0.1875);
    assert_eq!(report["grid_resolution"], 201);
}

#[test]
fn surface_reports_match_captions() {
    let report = |fixture: &str, metric: &str| -> serde_json::Value {
        let o = run(&["surface", "--fixture", fixture, "--metric", metric, "--resolution", "41"]);
        assert!(o.status.success(), "{}", stderr(&o));
        serde_json::from_str(&stdout(&o)).unwrap()
    };
    let r = report("example-E.2", "divergence:brier");
    assert_eq!(r["observationally_strictly_proper"], true);
    assert_eq!(r["orientation"], "minimize");
    let r = report("example-E.3", "ipw:brier");
    assert_eq!(r["strictly_proper"], true);
    assert_eq!(r["maximizers"], serde_json::json!([[0.5, 0.25]]));
}

#[test]
fn surface_csv_golden() {
    let o = run(&["surface", "--fixture", "example-E.2", "--metric", "ipw:brier", "--resolution", "5", "--format", "csv"]);
    assert_eq!(stdout(&o), golden("surface-E.2-ipw-r5.csv"));
}

#[test]
fn surface_write_failure_is_io_error() {
    let o = run(&["surface", "--fixture", "example-3.1", "--resolution", "5", "--out", "/nonexistent/dir/s.csv"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn bad_metric_is_usage_error() {
    let o = run(&["surface", "--fixture", "example-3.1", "--metric", "crps"]);
    assert_eq!(o.status.code(), Some(2));
}

fn estimate(extra: &[&str], threads: &str) -> Output {
    bin()
        .args(["estimate", "--replications", "200"])
        .args(extra)
        .env("PERFORMA_THREADS", threads)
        .output()
        .unwrap()
}

#[test]
fn estimate_is_deterministic() {
    let a = estimate(&[], "1");
    let b = estimate(&[], "4");
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("n,forecast,estimator,median,q05,q95,truth,replications,undefined_count\n"));
    assert_eq!(text.lines().count(), 1 + 11 * 2 * 3);
    let c = estimate(&["--seed", "7"], "2");
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn estimate_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"ns": [4], "replications": 1, "estimators": ["unbiased_brier"], "forecasts": [{"label": "c", "forecast": [0.5, 0.25]}]}"#,
    )
    .unwrap();
    let out = dir.path().join("summary.json");
    let o = run(&["estimate", "--config", cfg.to_str().unwrap(), "--format", "json", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    let row = &doc["rows"][0];
    assert_eq!(row["replications"], 1);
    assert_eq!(row["median"], row["q05"]);
}

#[test]
fn malformed_config_reports_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"forecasts": [{"label": "c", "forecast": [0.5, "x"]}]}"#).unwrap();
    let o = run(&["estimate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("forecasts[0].forecast"), "{}", stderr(&o));
    std::fs::write(&cfg, r#"{"replicates": 5}"#).unwrap();
    let o = run(&["estimate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("replicates"), "{}", stderr(&o));
}

#[test]
fn missing_config_is_io_error() {
    let o = run(&["estimate", "--config", "/nonexistent/cfg.json"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn retrain_golden_and_oscillation() {
    let o = run(&["retrain", "--fixture", "example-E.3", "--theta", "0.9,0.9"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), golden("retrain-E.3.csv"));
    assert!(stderr(&o).contains("stable at step 1"));
    let o = run(&["retrain", "--fixture", "self-defeating", "--theta", "0.9", "--max-steps", "6"]);
    assert!(stderr(&o).contains("not stable"));
    let thetas: Vec<String> = stdout(&o).lines().skip(1).map(|l| l.split(',').nth(1).unwrap().to_string()).collect();
    assert_eq!(thetas, ["0.9", "0.2", "0.8", "0.2", "0.8", "0.2", "0.8"]);
    let o = run(&["retrain", "--fixture", "example-E.3", "--theta", "0.9,0.9", "--max-steps", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn retrain_grid_family() {
    let o = run(&["retrain", "--fixture", "example-E.3", "--theta", "0.1,0.9", "--family", "grid:21", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let t: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(t["parameters"][1], serde_json::json!([0.5, 0.25]));
    assert_eq!(t["stable_at"], 1);
}

#[test]
fn dsep_exit_codes() {
    let o = run(&["dsep", "--graph", "figure-5a", "--a", "Y", "--b", "F", "--given", "A1,A2,A3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "separated\n");
    let o = run(&["dsep", "--graph", "figure-2a", "--a", "Y", "--b", "F", "--given", "A"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "connected\n");
    let o = run(&["dsep", "--graph", "figure-2a", "--a", "Y", "--b", "Q"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["dsep", "--graph", "figure-9z", "--a", "Y", "--b", "F"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("figure-5a"));
}

#[test]
fn dsep_graph_file() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    std::fs::write(&g, r#"{"vertices": ["F", "A", "Y"], "directed": [["F", "A"], ["A", "Y"]]}"#).unwrap();
    let o = run(&["dsep", "--graph", g.to_str().unwrap(), "--a", "Y", "--b", "F", "--given", "A"]);
    assert_eq!(o.status.code(), Some(0));
    std::fs::write(&g, r#"{"vertices": ["F", "Y"], "directed": [["F", "Y"], ["Y", "F"]]}"#).unwrap();
    let o = run(&["dsep", "--graph", g.to_str().unwrap(), "--a", "Y", "--b", "F"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn model_file_override() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    let text = golden_model();
    std::fs::write(&m, text).unwrap();
    let o = run(&["surface", "--model", m.to_str().unwrap(), "--resolution", "21"]);
    assert!(o.status.success(), "{}", stderr(&o));
    std::fs::write(&m, r#"{"actions": ["0", "1"], "outcomes": ["0", "1"], "kernel": {"slices": [{"bernoulli": 0.5}]}, "mechanism": {"kind": "argmax_rule"}}"#).unwrap();
    let o = run(&["surface", "--model", m.to_str().unwrap(), "--resolution", "21"]);
    assert_eq!(o.status.code(), Some(2));
}

fn golden_model() -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/models/example-E.3.json");
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn bad_thread_count_is_usage_error() {
    let o = bin().args(["example", "example-3.1"]).env("PERFORMA_THREADS", "zero").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}
