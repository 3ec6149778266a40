use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gdn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gdn")).args(args).output().expect("spawn gdn")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn error_json(out: &Output) -> Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().last().expect("an error line");
    serde_json::from_str(line).unwrap_or_else(|e| panic!("not JSON ({e}): {line}"))
}

#[test]
fn version_names_checkpoint_format() {
    let out = gdn(&["--version"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("gdn 0.1.0"), "{text}");
    assert!(text.contains("checkpoint format 1"), "{text}");
}

#[test]
fn usage_errors_exit_two_with_one_json_line() {
    for args in [
        vec!["impute", "--nonsense"],
        vec!["frobnicate"],
        vec![],
        vec!["impute", "--out", "x.json", "--profile", "mnist"],
        vec!["noise", "--preset", "k2", "--kernel", "chebyshev", "--out", "x.json"],
    ] {
        let out = gdn(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = error_json(&out);
        assert_eq!(err["error"]["code"], 2);
        assert_eq!(err["error"]["kind"], "usage");
        assert_eq!(String::from_utf8_lossy(&out.stderr).trim().lines().count(), 1, "{args:?}");
    }
}

#[test]
fn io_failures_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = gdn(&["impute", "--config", "/definitely/missing.json", "--out", "x.json"]);
    assert_eq!(out.status.code(), Some(3));
    let out = gdn(&["impute", "--graph", "/missing.edges", "--features", "/missing.csv", "--out", "x.json"]);
    assert_eq!(out.status.code(), Some(3));
    let bad = dir.path().join("bad.edges");
    std::fs::write(&bad, "0 1\n2 2\n").unwrap();
    let out = gdn(&["noise", "--graph", s(&bad), "--out", s(&dir.path().join("n.json"))]);
    assert_eq!(out.status.code(), Some(3));
    assert!(error_json(&out)["error"]["message"].as_str().unwrap().contains("line 2"));
}

#[test]
fn numerical_failures_exit_four() {
    let dir = tempfile::tempdir().unwrap();
    // P3 has λ = 1, where the exact inverse kernel is singular.
    let out = gdn(&["noise", "--preset", "p3", "--kernel", "exact-inverse", "--out", s(&dir.path().join("n.json"))]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(error_json(&out)["error"]["kind"], "numerical");
}

#[test]
fn schema_violations_name_the_key_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"model": {"hidden1": 8, "widht": 3}}"#).unwrap();
    let out = gdn(&["impute", "--profile", "synthetic", "--config", s(&cfg), "--out", "x.json"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = error_json(&out)["error"]["message"].as_str().unwrap().to_string();
    assert!(msg.contains("model.widht"), "{msg}");
}

#[test]
fn impute_writes_one_report_per_method_with_config_hash() {
    let dir = tempfile::tempdir().unwrap();
    let (g, f, out, csv) = (
        dir.path().join("g.edges"),
        dir.path().join("f.csv"),
        dir.path().join("report.json"),
        dir.path().join("report.csv"),
    );
    let n = 30;
    let edges: String = (0..n).map(|i| format!("{} {}\n", i, (i + 1) % n)).collect();
    std::fs::write(&g, edges).unwrap();
    let feats: String = (0..n)
        .map(|i| (0..6).map(|j| format!("{}", ((i * 7 + j * 3) % 5) as f64 / 4.0)).collect::<Vec<_>>().join(",") + "\n")
        .collect();
    std::fs::write(&f, feats).unwrap();
    let run = gdn(&[
        "impute", "--graph", s(&g), "--features", s(&f), "--missing-rate", "0.1", "--methods", "mean,knn,gdn",
        "--seeds", "0,1,2,3,4", "--hidden1", "8", "--hidden2", "4", "--epochs", "5", "--out", s(&out), "--csv", s(&csv),
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let entries = report.as_array().unwrap();
    assert_eq!(entries.len(), 3);
    for e in entries {
        for key in ["method", "rmse_mean", "rmse_per_seed", "seeds", "config_hash", "seconds"] {
            assert!(e.get(key).is_some(), "missing {key}");
        }
        assert_eq!(e["rmse_per_seed"].as_array().unwrap().len(), 5);
        assert_eq!(e["config_hash"].as_str().unwrap().len(), 64);
    }
    let csv = std::fs::read_to_string(&csv).unwrap();
    assert!(csv.starts_with("method,seed,rmse\n"));
    assert_eq!(csv.lines().count(), 16);
}

#[test]
fn flags_override_file_which_overrides_profile() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let args = |out: &Path| {
        vec![
            "impute".to_string(), "--profile".into(), "synthetic".into(), "--methods".into(), "mean".into(),
            "--seeds".into(), "0".into(), "--config".into(), s(&cfg).into(), "--out".into(), s(out).into(),
        ]
    };
    let hash = |p: &Path| -> String {
        let v: Value = serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
        v[0]["config_hash"].as_str().unwrap().to_string()
    };
    // file sets epochs 7; the flag restores the profile's 200
    std::fs::write(&cfg, r#"{"epochs": 7}"#).unwrap();
    let mut with_flag = args(&a);
    with_flag.extend(["--epochs".into(), "200".into()]);
    assert!(gdn(&with_flag.iter().map(String::as_str).collect::<Vec<_>>()).status.success());
    std::fs::write(&cfg, r#"{}"#).unwrap();
    assert!(gdn(&args(&b).iter().map(String::as_str).collect::<Vec<_>>()).status.success());
    assert_eq!(hash(&a), hash(&b));
    std::fs::write(&cfg, r#"{"epochs": 7}"#).unwrap();
    assert!(gdn(&args(&b).iter().map(String::as_str).collect::<Vec<_>>()).status.success());
    assert_ne!(hash(&a), hash(&b));
}

#[test]
fn spectra_writes_lambda_coefficient_csv() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("k2.edges");
    let f = dir.path().join("x.csv");
    let out = dir.path().join("spec.csv");
    std::fs::write(&g, "0 1\n").unwrap();
    std::fs::write(&f, "1\n1\n").unwrap();
    assert!(gdn(&["spectra", "--graph", s(&g), "--features", s(&f), "--out", s(&out)]).status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("lambda,coefficient"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    // x = (1, 1) projects onto the λ = 0 eigenvector only: (√2, 0)
    assert!((rows[0].0).abs() < 1e-12 && (rows[0].1.abs() - 2f64.sqrt()).abs() < 1e-12);
    assert!((rows[1].0 - 2.0).abs() < 1e-12 && rows[1].1.abs() < 1e-12);
    assert!(text.ends_with('\n') && !text.contains('\r'));
}

#[test]
fn save_model_writes_a_loadable_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("model.json");
    let out = dir.path().join("r.json");
    let run = gdn(&[
        "impute", "--profile", "synthetic", "--methods", "gdn", "--seeds", "0", "--epochs", "3", "--hidden1", "8",
        "--hidden2", "4", "--out", s(&out), "--save-model", s(&ckpt),
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let c = gdn_core::nn::Checkpoint::load(&ckpt).unwrap();
    assert_eq!(c.format_version, 1);
    let p = c.params().unwrap();
    assert_eq!(p.w1.dim(), (200, 8));
    assert_eq!(p.w3.dim(), (12, 12));
}

#[test]
fn generate_honours_single_seed_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let (out, export) = (dir.path().join("g.json"), dir.path().join("mols.txt"));
    let run = gdn(&["generate", "--graphs", "8", "--iters", "3", "--seed", "4", "--out", s(&out), "--export", s(&export)]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["seeds"], serde_json::json!([4]));
    assert_eq!(v["feature_term"], true);
    let reloaded = gdn_core::generation::load_molecules(&export).unwrap();
    assert_eq!(reloaded.len(), 8);
    // the exported corpus is itself a valid dataset
    let out2 = dir.path().join("g2.json");
    let run = gdn(&["generate", "--dataset", s(&export), "--iters", "3", "--seed", "4", "--out", s(&out2)]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
}
