//! End-to-end CLI checks through the built binary.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reticular"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn classify_f4() {
    let out = run(&[
        "classify",
        "x1^2+y1^3",
        "--r",
        "1",
        "--k",
        "1",
        "--mode",
        "r",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["class"], "F4+");
    assert_eq!(v["codim"], 3);
    assert_eq!(v["determinacy"], 3);
}

#[test]
fn classify_not_simple_exits_zero() {
    let out = run(&["classify", "x1*y1", "--r", "1", "--k", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["class"], "NOT_SIMPLE");
    assert_eq!(v["codim"], "INFINITE");
}

#[test]
fn codim_quartic() {
    let out = run(&["codim", "y1^4", "--k", "1", "--mode", "rplus"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["codim"], 2);
    assert_eq!(v["basis"], serde_json::json!(["y1", "y1^2"]));
    assert_eq!(v["mode"], "Rplus");
    assert_eq!(v["stabilized"], true);
}

#[test]
fn determinacy_cubic() {
    let out = run(&["determinacy", "x1^3", "--r", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["determinacy"], 3);
}

#[test]
fn unfold_and_versal() {
    let out = run(&["unfold", "y1^3", "--k", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["family"], "y1*u1 + y1^3");
    assert_eq!(v["n"], 1);

    let out = run(&[
        "versal",
        "y1^3 + q1*y1",
        "--k",
        "1",
        "--n",
        "1",
        "--mode",
        "rplus",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["versal"], true);

    let out = run(&["stability", "y1^3", "--k", "1", "--n", "0"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["versal"], false);
    assert_eq!(v["class"], "A2");
}

#[test]
fn unfold_infinite_codimension_is_domain_error() {
    let out = run(&["unfold", "x1*y1", "--r", "1", "--k", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_error_exits_one() {
    let out = run(&["classify"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn parse_error_exits_two() {
    let out = run(&["classify", "x1 + w2", "--r", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("unknown variable"), "stderr: {err}");
}

#[test]
fn catalog_list_and_get() {
    let out = run(&["catalog", "list", "--r", "1", "--n-max", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let keys: Vec<&str> = text
        .lines()
        .map(|l| l.split('\t').next().unwrap())
        .collect();
    assert_eq!(
        keys,
        vec!["B2+", "B2-", "B3+", "B3-", "B4+", "B4-", "C3+", "C3-", "C4+", "C4-", "F4+", "F4-"]
    );

    let out = run(&["catalog", "get", "C3+", "--legendrian"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["key"], "C3e+");
    assert_eq!(v["n"], 2);

    let out = run(&["catalog", "get", "Z7"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn caustic_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b2.csv");
    let out = run(&[
        "caustic",
        "--catalog",
        "B2+",
        "--range",
        "-1:1",
        "--res",
        "101",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert!(v["points"].as_u64().unwrap() >= 1);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("coord_1,stratum"));
    for line in lines {
        assert!(line.ends_with(",Q_empty_1"), "line: {line}");
    }
}

#[test]
fn wavefront_runs_from_catalog() {
    let out = run(&[
        "wavefront",
        "--catalog",
        "A2",
        "--range",
        "-1:1,-1:1",
        "--res",
        "51",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert!(v["points"].as_u64().unwrap() > 10);
}

#[test]
fn config_file_overrides_solver_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("mesh.cfg");
    std::fs::write(
        &cfg_path,
        "tol_eq = 1e-8\nseeds_per_dim = 5\n# comment\nreseed_stride = 2\n",
    )
    .unwrap();
    let out = run(&[
        "caustic",
        "--catalog",
        "A2",
        "--range",
        "-1:1",
        "--res",
        "41",
        "--config",
        cfg_path.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    // bad key is a domain error
    std::fs::write(&cfg_path, "no_such_key = 1\n").unwrap();
    let out = run(&[
        "caustic",
        "--catalog",
        "A2",
        "--range",
        "-1:1",
        "--res",
        "41",
        "--config",
        cfg_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ply_export_is_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a2.ply");
    let out = run(&[
        "wavefront",
        "--catalog",
        "A2",
        "--range",
        "-1:1,-1:1",
        "--res",
        "51",
        "--out",
        path.to_str().unwrap(),
        "--format",
        "ply",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("ply"));
    assert_eq!(lines.next(), Some("format ascii 1.0"));
    assert!(text.contains("element vertex"));
    assert!(text.contains("property uchar stratum"));
    assert!(text.contains("end_header"));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = ["classify", "y1^2*y2 - y2^4", "--k", "2"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let args = [
        "caustic",
        "--catalog",
        "A3+",
        "--range",
        "-1:1",
        "--res",
        "60",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
}
