use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_antihankel")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn values(doc: &Value) -> Vec<f64> {
    doc["eigenvalues"].as_array().unwrap().iter().map(|e| e["value"].as_f64().unwrap()).collect()
}

#[test]
fn solve_small_instance_as_json() {
    let out = run(&["solve", "--n", "1", "--a", "1", "--b", "2", "--c", "3", "--format", "json"]);
    assert!(out.status.success());
    let doc = json(&out);
    assert_eq!(doc["n"], 1);
    let want = [-3.093_373_021_653_583_5, 0.941_164_490_234_52, 5.152_208_531_419_061_5];
    for (got, w) in values(&doc).iter().zip(want) {
        assert!((got - w).abs() <= 1e-9);
    }
    assert!(doc["eigenvalues"].as_array().unwrap().iter().all(|e| e["kind"] == "SECULAR_ZERO"));
    assert_eq!(doc["diagnostics"]["complete"], true);
}

#[test]
fn exchange_matrix_multiplicities() {
    let out = run(&["solve", "--n", "5", "--a", "0", "--b", "0", "--c", "1"]);
    assert!(out.status.success());
    let vals = values(&json(&out));
    assert_eq!(vals.iter().filter(|&&v| v == -1.0).count(), 3);
    assert_eq!(vals.iter().filter(|&&v| v == 1.0).count(), 4);
}

#[test]
fn verify_residuals_are_small() {
    let out = run(&["verify", "--n", "6", "--a", "1.7", "--b", "-0.4", "--c", "0.9"]);
    assert!(out.status.success());
    let doc = json(&out);
    for (name, v) in doc["residuals"].as_object().unwrap() {
        assert!(v.as_f64().unwrap() <= 1e-11, "{name} = {v}");
    }
    assert_eq!(doc["brackets_ok"], true);
    assert_eq!(doc["brackets"].as_array().unwrap().len(), 8);
}

#[test]
fn compare_exit_status_follows_tolerance() {
    let args = ["compare", "--n", "7", "--a", "1.2", "--b", "-0.7", "--c", "0.3"];
    let ok = run(&args);
    assert_eq!(ok.status.code(), Some(0));
    let doc = json(&ok);
    assert!(doc["comparison"]["max_abs_diff"].as_f64().unwrap() <= 1e-8);
    assert_eq!(doc["oracle"].as_array().unwrap().len(), 9);

    let strict = run(&[&args[..], &["--tol-compare", "0"]].concat());
    let doc = json(&strict);
    let failed = doc["comparison"]["max_abs_diff"].as_f64().unwrap() > 0.0;
    assert_eq!(strict.status.code(), Some(if failed { 1 } else { 0 }));
}

#[test]
fn csv_layout() {
    let out = run(&["solve", "--n", "2", "--a", "1", "--b", "-1", "--c", "0.5", "--format", "csv", "--vectors"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,value,kind,residual"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    for (k, row) in rows.iter().enumerate() {
        assert_eq!(row[0], (k + 1).to_string());
        assert!(row[3].parse::<f64>().unwrap() <= 1e-10);
    }
}

#[test]
fn vectors_in_json() {
    let out = run(&["solve", "--n", "3", "--a", "0.5", "--b", "1.5", "--c", "-1", "--vectors"]);
    let doc = json(&out);
    for e in doc["eigenvalues"].as_array().unwrap() {
        assert_eq!(e["vector"].as_array().unwrap().len(), 5);
        assert!(e["residual"].as_f64().unwrap() <= 1e-10);
    }
}

#[test]
fn batch_keeps_input_order() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("instances.txt");
    let lines: Vec<String> = (1..=12).rev().map(|n| format!("{n} 1.0 -0.5 0.25")).collect();
    std::fs::write(&path, format!("# sizes descending\n{}\n", lines.join("\n"))).unwrap();
    let path = path.to_str().unwrap();

    let doc = json(&run(&["solve", "--batch", path]));
    let ns: Vec<u64> = doc.as_array().unwrap().iter().map(|d| d["n"].as_u64().unwrap()).collect();
    assert_eq!(ns, (1..=12).rev().collect::<Vec<u64>>());

    let out = run(&["oracle", "--batch", path, "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("instance,index,value,kind,residual\n"));
    let first_rows = text.lines().skip(1).filter(|l| l.starts_with("1,")).count();
    assert_eq!(first_rows, 14);
}

#[test]
fn output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let out = run(&["oracle", "--n", "2", "--a", "1", "--b", "1", "--c", "1", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(values(&doc).len(), 4);
}

#[test]
fn errors_are_json_objects() {
    for args in [
        &["solve", "--n", "0", "--a", "1", "--b", "1", "--c", "1"][..],
        &["solve", "--n", "3", "--a", "1", "--b", "1"],
        &["solve", "--n", "3", "--a", "x", "--b", "1", "--c", "1"],
        &["explode", "--n", "3"],
        &["solve", "--n", "3", "--a", "1", "--b", "1", "--c", "1", "--tol", "-1"],
        &["solve", "--batch", "/nonexistent/instances.txt"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let doc = json(&out);
        assert!(doc["error"]["kind"].is_string() && doc["error"]["message"].is_string(), "{doc}");
    }
    let doc = json(&run(&["solve", "--n", "3", "--a", "1", "--b", "1", "--c", "1", "--tol", "0"]));
    assert_eq!(doc["error"]["kind"], "invalid_tolerance");
}

#[test]
fn malformed_batch_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, "1 1 2 3\n2 1 2\n").unwrap();
    let out = run(&["solve", "--batch", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let doc = json(&out);
    assert_eq!(doc["error"]["kind"], "batch_format");
    assert!(doc["error"]["message"].as_str().unwrap().contains("line 2"));
}

#[test]
fn thread_cap_is_honoured() {
    let out = Command::new(env!("CARGO_BIN_EXE_antihankel"))
        .args(["solve", "--n", "9", "--a", "1", "--b", "2", "--c", "3"])
        .env("ANTIHANKEL_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
    let bad = Command::new(env!("CARGO_BIN_EXE_antihankel"))
        .args(["solve", "--n", "9", "--a", "1", "--b", "2", "--c", "3"])
        .env("ANTIHANKEL_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(json(&bad)["error"]["kind"], "invalid_environment");
}

#[test]
fn bench_table_small() {
    let out = run(&["bench", "--n", "30", "--a", "1", "--b", "-0.5", "--c", "0.75", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let sizes: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(sizes, ["16", "32"]);
}
