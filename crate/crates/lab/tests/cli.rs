use std::path::PathBuf;
use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lab")).args(args).output().expect("lab runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn kernel_grid_one_point_value() {
    let out = lab(&["kernel-grid", "--n", "1", "--rho", "1", "--beta", "0", "--z=-1,1,3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("u1,z1,u2,z2,value\r\n"));
    let row = text.lines().find(|l| l.starts_with("1,0.0000000000000000e0,1,0.0000000000000000e0,")).unwrap();
    let v: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
    assert!((v - 0.5641895835477563).abs() < 1e-14);
}

#[test]
fn empty_grid_is_an_error() {
    let out = lab(&["kernel-grid", "--z", "0,1,1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = lab(&["kernel-grid", "--levels", "3:1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn outputs_are_byte_identical_with_sidecar() {
    let (a, b) = (scratch("a.csv"), scratch("b.csv"));
    let args = |p: &PathBuf| vec!["sample-gue".to_string(), "--n=3".into(), "--rho=2".into(), "--trials=300".into(), "--seed=5".into(), format!("--out={}", p.display())];
    let run = |p: &PathBuf, threads: &str| {
        let st = Command::new(env!("CARGO_BIN_EXE_lab")).args(args(p)).env("LAB_THREADS", threads).status().unwrap();
        assert!(st.success());
    };
    run(&a, "1");
    run(&b, "3");
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let meta: serde_json::Value = serde_json::from_slice(&std::fs::read(scratch("a.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 5);
    assert!(meta["version"].is_string() && meta["wall_seconds"].is_number());
    assert_eq!(meta["config"]["common"]["n"], 3);
}

#[test]
fn aztec_svg_and_enumeration() {
    let out = lab(&["enumerate-aztec", "--n", "2", "--rho", "2", "--format", "json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["summary"]["tilings"], 13);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 13);
    let out = lab(&["sample-aztec", "--n", "3", "--rho", "1", "--steps", "5000"]);
    let svg = String::from_utf8(out.stdout).unwrap();
    assert!(svg.contains("<metadata>") && svg.trim_end().ends_with("</svg>"));
    let out = lab(&["density", "--z", "0.1", "--format", "svg"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_list_and_fault() {
    let out = lab(&["verify", "--list"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 11);
    let ok = lab(&["verify", "--criteria", "1,7"]);
    assert!(ok.status.success());
    let report = scratch("fault.json");
    let bad = lab(&["verify", "--criteria", "7", "--fault", "gamma-sign", "--out", report.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(doc["failing"], serde_json::json!([7]));
    assert!(String::from_utf8(bad.stdout).unwrap().contains("FAIL  7"));
}

#[test]
fn volume_and_induction_reports() {
    let out = lab(&["volume", "--n", "2", "--rho", "1", "--x=1,-0.5", "--y=0.7,-1", "--trials", "20000"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert!((row[3].parse::<f64>().unwrap() - 1.83).abs() < 1e-12);
    let out = lab(&["induction-check", "--n", "1", "--rho", "1", "--pairs", "2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().skip(1) {
        assert!(line.rsplit(',').next().unwrap().parse::<f64>().unwrap() < 1e-6);
    }
}
