use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_topogames"))
        .args(args)
        .env("TOPOGAMES_OUT_DIR", out)
        .output()
        .expect("binary runs")
}

fn ok(out: &Path, args: &[&str]) -> Value {
    let o = run(out, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn parity_on_toric_code() {
    let dir = tempfile::tempdir().unwrap();
    let v = ok(dir.path(), &["game", "parity", "--code", "tc2d", "--L", "4", "--P", "3"]);
    let ev = &v["result"]["evaluation"];
    assert_eq!(ev["p_q"], 1.0);
    assert_eq!(ev["p_q_exact"], "1/1");
    assert!((ev["mermin"].as_f64().unwrap() - 4.0).abs() < 1e-12);
    assert_eq!(v["seed"], 0);
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
    let (header, rows) = csv_rows(&dir.path().join("game-parity.csv"));
    assert_eq!(&header[..3], ["version", "config_hash", "seed"]);
    assert_eq!(rows.len(), 4);
}

#[test]
fn classical_parity_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let v = ok(dir.path(), &["game", "parity", "--classical", "--P", "5"]);
    assert_eq!(v["result"]["probability"], "5/8");
    assert_eq!(v["result"]["probability_float"], 0.625);
}

#[test]
fn deformation_sweep_table() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["sweep", "deformation", "--code", "tc2d", "--L", "2", "--family", "z", "--thetas", "0:0.5:0.05"]);
    let (header, rows) = csv_rows(&dir.path().join("sweep-deformation.csv"));
    assert_eq!(header, ["version", "config_hash", "seed", "strategy", "family", "theta", "p_q", "mermin"]);
    assert_eq!(rows.len(), 11);
    let pq: Vec<f64> = rows.iter().map(|r| r[6].parse().unwrap()).collect();
    assert!((pq[0] - 1.0).abs() < 1e-12);
    assert!(pq.windows(2).all(|w| w[1] <= w[0] + 1e-12));
}

#[test]
fn outputs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["game", "cellulation", "--code", "tc2d", "--L", "4", "--placement", "scaled:2", "--seed", "7"];
    ok(a.path(), &[&args[..], &["--workers", "1"]].concat());
    ok(b.path(), &[&args[..], &["--workers", "4"]].concat());
    for f in ["game-cellulation.json", "game-cellulation.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "code = \"tc2d\"\nL = 3\nP = 4\nseed = 11\n").unwrap();
    let v = ok(dir.path(), &["game", "parity", "--config", cfg.to_str().unwrap(), "--P", "3"]);
    assert_eq!(v["config"]["P"], 3);
    assert_eq!(v["config"]["L"], 3);
    assert_eq!(v["seed"], 11);
    assert_eq!(v["result"]["players"], 3);
}

#[test]
fn errors_are_single_lines() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["game", "parity", "--code", "tc2d"][..],
        &["game", "parity", "--no-such-flag"],
        &["code", "info", "--code", "tc2d", "--L", "1"],
        &["game", "cellulation", "--complex", "/does/not/exist"],
    ] {
        let o = run(dir.path(), args);
        assert!(!o.status.success(), "{args:?}");
        let err = String::from_utf8(o.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{err}");
        assert!(err.starts_with("error: "), "{err}");
    }
}

#[test]
fn saved_operator_sets_reload() {
    let dir = tempfile::tempdir().unwrap();
    let ops = dir.path().join("cage.json");
    let args = ["strategy", "validate", "--code", "xcube", "--L", "3", "--variant", "cage", "--save-ops", ops.to_str().unwrap()];
    let v = ok(dir.path(), &args);
    assert_eq!(v["result"]["report"]["ready"], true);
    let direct = ok(dir.path(), &["game", "parity", "--code", "xcube", "--L", "3", "--variant", "cage"]);
    let loaded = ok(dir.path(), &["game", "parity", "--ops", ops.to_str().unwrap()]);
    assert_eq!(direct["result"]["evaluation"], loaded["result"]["evaluation"]);
    assert_eq!(loaded["result"]["evaluation"]["p_q"], 1.0);
}

#[test]
fn complex_text_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = ok(dir.path(), &["complex", "info", "--code", "tc3d-faces", "--L", "3"]);
    assert_eq!(a["result"]["betti"], serde_json::json!([1, 3, 3, 1]));
    let text = dir.path().join("complex-info.txt");
    let b = ok(dir.path(), &["complex", "info", "--complex", text.to_str().unwrap()]);
    assert_eq!(a["result"], b["result"]);
}

#[test]
fn code_info_and_magic_square() {
    let dir = tempfile::tempdir().unwrap();
    let v = ok(dir.path(), &["code", "info", "--code", "xcube", "--L", "3"]);
    assert_eq!(v["result"]["ground_space_log_dim"], 15);
    let v = ok(dir.path(), &["game", "magic-square", "--Lx", "8", "--Ly", "4"]);
    assert_eq!(v["result"]["all_hold"], true);
    assert_eq!(v["result"]["evaluation"]["p_q_exact"], "1/1");
    let v = ok(dir.path(), &["game", "magic-square", "--classical", "--d", "2"]);
    assert_eq!(v["result"]["probability"], "8/9");
}
