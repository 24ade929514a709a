use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn gkpb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gkpb")).args(args).output().expect("spawn gkpb")
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).to_string_lossy().into_owned()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

const HEADER: &str = "gate,d,kappa,delta,eps,c,lower,upper,paper_bound,pass,regime_ok,method,err_est";

#[test]
fn table2_csv() {
    let out = gkpb(&["table2", "--kappa", "0.1,0.05", "--d", "2,3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# gkp-bounds report schema v1");
    assert_eq!(lines[1], HEADER);
    let rows = &lines[2..];
    assert_eq!(rows.len(), 3 * 2 * 2);
    for row in rows {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), 13, "{row}");
        assert_eq!(cells[9], "true", "{row}");
        let lower: f64 = cells[6].parse().unwrap();
        let upper: f64 = cells[7].parse().unwrap();
        let paper: f64 = cells[8].parse().unwrap();
        assert!(lower <= upper && upper <= paper, "{row}");
    }
}

#[test]
fn table2_json() {
    let out = gkpb(&["table2", "--kappa", "0.1", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], "v1");
    assert_eq!(v["command"], "table2");
    assert_eq!(v["all_pass"], true);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    let gates: Vec<&str> = rows.iter().map(|r| r["gate"].as_str().unwrap()).collect();
    assert_eq!(gates, ["X", "Z", "F"]);
    let x = &rows[0];
    assert!((x["c"].as_f64().unwrap() - 0.997_503_122_397_460_1).abs() < 1e-12);
}

#[test]
fn nogo_lower_bounds() {
    let out = gkpb(&["nogo", "--kappa", "0.003,0.001", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    for row in v["rows"].as_array().unwrap() {
        assert_eq!(row["gate"], "P");
        assert!(row["lower"].as_f64().unwrap() > 0.2);
        assert_eq!(row["pass"], true);
    }
}

#[test]
fn sweep_single_gate() {
    let out = gkpb(&["sweep", "--gate", "Z^2", "--d", "3", "--kappa", "0.1,0.05,0.02", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json(&out)["rows"].as_array().unwrap().clone();
    assert_eq!(rows.len(), 3);
    let uppers: Vec<f64> = rows.iter().map(|r| r["upper"].as_f64().unwrap()).collect();
    assert!(uppers.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn xcheck_agrees() {
    let out = gkpb(&["xcheck", "--kappa", "0.1", "--gate", "X,Z,P"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 2 + 3);
    assert!(text.lines().skip(2).all(|l| l.contains("analytic-vs-grid") && l.split(',').nth(9) == Some("true")));
}

#[test]
fn circuit_fig1() {
    let out = gkpb(&["circuit", &fixture("fig1.json"), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["valid"], true);
    assert_eq!(v["order"], serde_json::json!([10, 11, 12]));
    assert!((v["budget"].as_f64().unwrap() - 0.206_721_466_962_827_5).abs() < 1e-12);
    let explicit = &v["rows"][0];
    assert!(explicit["d"].is_null() && explicit["kappa"].is_null());
}

#[test]
fn circuit_chain() {
    let out = gkpb(&["circuit", &fixture("chain.json"), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let rows = v["rows"].as_array().unwrap();
    let sum: f64 = rows.iter().map(|r| r["upper"].as_f64().unwrap()).sum();
    assert!((v["budget"].as_f64().unwrap() - sum).abs() < 1e-14);
}

#[test]
fn circuit_cyclic_fails() {
    let out = gkpb(&["circuit", &fixture("cyclic.json"), "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["valid"], false);
    assert_eq!(v["all_pass"], false);
    assert!(v["errors"].as_array().unwrap().iter().any(|e| e.as_str().unwrap().contains("cycle")));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["table2"],
        vec!["table2", "--kappa", "abc"],
        vec!["table2", "--kappa", "0.1", "--delta", "0.01", "--symmetric"],
        vec!["table2", "--kappa", "0.1", "--eps", "0.2", "--eps-optimal"],
        vec!["bogus"],
        vec!["circuit", "/nonexistent/graph.json"],
    ] {
        let out = gkpb(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn out_writes_file() {
    let dir = std::env::temp_dir().join(format!("gkpb-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.csv");
    let out = gkpb(&["table2", "--kappa", "0.1", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().nth(1), Some(HEADER));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn output_is_deterministic() {
    let args = ["table2", "--kappa", "0.05", "--d", "3", "--format", "json"];
    assert_eq!(gkpb(&args).stdout, gkpb(&args).stdout);
}
