use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_greedylab"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn build_qglc(dir: &Path) {
    let o = run(
        &[
            "build",
            "--construction",
            "qglc-not-lucc",
            "--p",
            "2",
            "--mode",
            "toy",
            "--m1",
            "1",
            "--m2-margin",
            "2.05",
            "--out",
            "s.json",
        ],
        dir,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn build_toy_budget_space() {
    let dir = tempfile::tempdir().unwrap();
    build_qglc(dir.path());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("s.json")).unwrap()).unwrap();
    assert_eq!(v["dim"], 3);
    assert!(v["certificates"].as_array().unwrap().iter().all(|c| c["holds"] == true));
}

#[test]
fn unrealizable_fidelity_plan_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "build",
            "--construction",
            "tqg-sep",
            "--p",
            "2",
            "--mode",
            "fidelity",
            "--M",
            "2",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 2);
    let report: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(report["realizable"], false);
    assert!(o.stdout.is_empty());
}

#[test]
fn fqg_records_kuc_bound() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "build",
            "--construction",
            "fqg-not-ucc",
            "--m",
            "100",
            "--pX",
            "1",
            "--pY",
            "2",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["combined"]["info"]["lower_bounds"]["Kuc"].as_f64(), Some(10.0));
}

#[test]
fn bad_params_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["build", "--construction", "nosuch"], dir.path())), 1);
    assert_eq!(
        code(&run(&["build", "--construction", "tqg-sep", "--p", "0.5"], dir.path())),
        1
    );
    assert_eq!(
        code(&run(
            &["build", "--construction", "tqg-sep", "--mode", "fidelity"],
            dir.path()
        )),
        1
    );
    assert_eq!(
        code(&run(
            &["estimate", "--space", "missing.json", "--constant", "Ktq"],
            dir.path()
        )),
        1
    );
    assert_eq!(code(&run(&["frobnicate"], dir.path())), 1);
}

#[test]
fn estimate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    build_qglc(dir.path());
    let args = [
        "estimate",
        "--space",
        "s.json",
        "--constant",
        "Ktq",
        "--budget",
        "10000",
        "--seed",
        "42",
    ];
    let a = run(&args, dir.path());
    assert_eq!(code(&a), 0);
    let b = run(
        &[
            "--threads",
            "1",
            "estimate",
            "--space",
            "s.json",
            "--constant",
            "Ktq",
            "--budget",
            "10000",
            "--seed",
            "42",
        ],
        dir.path(),
    );
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["kind"], "Ktq");
    assert!(v["lower"].as_f64().unwrap() >= 1.0);
}

#[test]
fn tampered_certificate_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    build_qglc(dir.path());
    let path = dir.path().join("s.json");
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let rhs = v["certificates"][1]["rhs"].as_f64().unwrap();
    v["certificates"][1]["rhs"] = serde_json::json!(rhs * 0.5);
    std::fs::write(&path, v.to_string()).unwrap();
    let o = run(&["estimate", "--space", "s.json", "--constant", "Ktq"], dir.path());
    assert_eq!(code(&o), 3);
}

#[test]
fn verify_main_suite_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    build_qglc(dir.path());
    let o = run(
        &[
            "verify", "--suite", "thm-main", "--space", "s.json", "--trials", "1000", "--seed", "7", "--out", "r.csv",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("suite,trials,failures,max_slack,tolerance,seed"));
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 6);
        assert_eq!(cols[2], "0");
        assert_eq!(cols[5], "7");
    }
}

#[test]
fn verify_all_and_unknown_suite() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--suite", "all"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(code(&run(&["verify", "--suite", "nosuch"], dir.path())), 1);
    let o = run(
        &["verify", "--suite", "pconvex", "--trials", "50", "--format", "json"],
        dir.path(),
    );
    let reports: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(reports[0]["suite"], "pconvex");
}

#[test]
fn curve_and_report_reparse() {
    let dir = tempfile::tempdir().unwrap();
    build_qglc(dir.path());
    let o = run(
        &[
            "curve", "--space", "s.json", "--curve", "Phi", "--t-grid", "0.5:1:3", "--budget", "2000",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let phi = v["curves"]["Phi"].as_array().unwrap();
    assert_eq!(phi.len(), 3);
    let lows: Vec<f64> = phi.iter().map(|e| e["lower"].as_f64().unwrap()).collect();
    assert!(lows.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(
        code(&run(&["curve", "--space", "s.json", "--t-grid", "0:1:3"], dir.path())),
        1
    );
    let o = run(
        &["report", "--space", "s.json", "--budget", "500", "--out", "rep.json"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("rep.json")).unwrap()).unwrap();
    assert_eq!(v["dim"], 3);
    assert!(v["recorded_lower_bounds"]["Klu"].as_f64().unwrap() > 0.0);
}
