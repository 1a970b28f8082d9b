use std::process::Command;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_qkd-offload"));
    c.env("RUST_LOG", "warn");
    c
}

fn ok(c: &mut Command) -> String {
    let out = c.output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn gen_code_then_run_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let code = dir.path().join("1_code.alist");
    ok(bin().args(["gen-code", "--n", "600", "--seed", "3", "--out"]).arg(&code));
    let scenario = serde_json::json!({
        "schema": 1,
        "seed": 5,
        "channel": {"e": 0.02, "d": 0.05},
        "code": {"kind": "alist", "path": "1_code.alist"},
        "decoder": {"variant": {"kind": "sum_product"}, "max_iterations": 40, "qber_prior": 0.02},
        "mode": "local",
        "blocks": 3
    });
    let path = dir.path().join("s.json");
    std::fs::write(&path, scenario.to_string()).unwrap();
    let out = dir.path().join("out");
    let stdout = ok(bin()
        .args(["run", "--mode", "rem_ir", "--blocks", "4", "--scenario"])
        .arg(&path)
        .arg("--out")
        .arg(&out));
    assert!(stdout.contains("4 blocks"), "{stdout}");
    let csv = std::fs::read_to_string(out.join("blocks.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["mode"], "rem_ir");
}

#[test]
fn curves_and_mpc_tables() {
    let dir = tempfile::tempdir().unwrap();
    ok(bin().args(["curves", "--e", "0.02,0.05", "--d-points", "11", "--out"]).arg(dir.path()));
    let curves = std::fs::read_to_string(dir.path().join("curves.csv")).unwrap();
    assert_eq!(curves.lines().next(), Some("e,d,c_s,c_s_enc,feasible"));
    assert_eq!(curves.lines().count(), 1 + 2 * 11);
    ok(bin().args(["mpc-bench", "--sizes", "120,240", "--iterations", "2", "--out"]).arg(dir.path()));
    let table = std::fs::read_to_string(dir.path().join("mpc_table.csv")).unwrap();
    assert_eq!(
        table.lines().next(),
        Some("block_size,bitwidth,circuit_depth,time_s,data_MB,rounds,bitrate_at_10iter")
    );
    assert_eq!(table.lines().count(), 3);
}

#[test]
fn bad_inputs_fail_with_message() {
    let out = bin().args(["run", "--scenario", "/nonexistent/s.json"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/s.json"));
    let out = bin().args(["run", "--scenario", "x.json", "--mode", "sideways"]).output().unwrap();
    assert!(!out.status.success());
}
