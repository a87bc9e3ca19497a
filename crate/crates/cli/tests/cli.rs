use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn run(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_nonlocality"))
        .args(args)
        .env_remove("NONLOCALITY_THREADS")
        .output()
        .expect("spawn");
    let code = out.status.code().expect("exit code");
    let report = if code == 1 {
        Value::String(String::from_utf8_lossy(&out.stderr).into_owned())
    } else {
        serde_json::from_slice(&out.stdout).expect("json report")
    };
    (code, report)
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn builtin_files_feed_the_other_commands() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r) = run(&["builtin", "magic_square", "--dir", path(dir.path())]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["behavior_exact"], true);
    assert_eq!(r["results"]["quantum_winning_probability"]["decimal"], "1");

    let game = dir.path().join("magic_square_game.json");
    let behavior = dir.path().join("magic_square_behavior.json");
    let (code, r) = run(&["classical-value", path(&game), "--list", "3"]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["omega_classical"]["exact"], "8/9");
    assert_eq!(r["results"]["optimizer_count"], "144");
    assert_eq!(r["results"]["optimizers"].as_array().unwrap().len(), 3);

    let (code, r) = run(&["local-content", path(&behavior)]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["q_l"]["exact"], "0/1");

    let (code, r) = run(&["verify-equivalence", path(&behavior)]);
    assert_eq!(code, 0);
    for key in ["FNS", "FN", "AVN", "PT"] {
        assert_eq!(r["results"][key], "yes", "{key}");
    }
}

#[test]
fn report_envelope() {
    let input = fixture("cntz_3233.json");
    let (code, r) = run(&["critical", path(&input)]);
    assert_eq!(code, 0);
    assert_eq!(r["command"][0], "critical");
    assert_eq!(r["tool_version"], env!("CARGO_PKG_VERSION"));
    assert!(r["timing_seconds"].as_f64().unwrap() >= 0.0);
    let digest = r["input_digest"].as_str().unwrap();
    assert_eq!(digest.len(), 64);
    assert!(digest.bytes().all(|b| b.is_ascii_hexdigit()));
    let (_, again) = run(&["critical", path(&input)]);
    assert_eq!(again["input_digest"], r["input_digest"]);
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let status = Command::new(env!("CARGO_BIN_EXE_nonlocality"))
        .args(["--output", path(&out), "cntz-enum", "2,2,2,2", "--threads", "1"])
        .status()
        .unwrap();
    assert!(status.success());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["results"]["classes"], 8);
    assert_eq!(r["results"]["group_order"], "64");
}

#[test]
fn negative_answers_exit_two() {
    let table = fixture("cntz_3233.json");
    let (code, r) = run(&["realizable", path(&table)]);
    assert_eq!(code, 2);
    assert_eq!(r["results"]["realizable"], false);

    let (code, r) = run(&["npa-feasible", path(&table), "--level", "1"]);
    assert_eq!(code, 2);
    assert_eq!(r["results"]["verdict"], "infeasible");

    let (code, r) = run(&["npa-feasible", path(&fixture("avn_3434.json")), "--level", "1"]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["verdict"], "feasible");
}

#[test]
fn tightness_and_lift() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["builtin", "chsh", "--dir", path(dir.path())]).0, 0);
    let game = dir.path().join("chsh_game.json");

    let (code, r) = run(&["tightness", path(&game)]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["local_bound"]["exact"], "3/4");
    assert_eq!(r["results"]["tight"], true);

    let lifted = dir.path().join("lifted.json");
    let (code, r) = run(&["lift", path(&game), "-n", "2", "--game-out", path(&lifted)]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["scenario"], serde_json::json!([4, 2, 4, 2]));
    assert!(lifted.exists());

    let (code, r) = run(&["ns-value", path(&game)]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["ns_value"]["exact"], "1/1");

    let (code, r) = run(&["npa-bound", path(&game), "--level", "1"]);
    assert_eq!(code, 0);
    let bound: f64 = r["results"]["upper_bound"]["decimal"].as_str().unwrap().parse().unwrap();
    assert!((bound - (2.0 + 2f64.sqrt()) / 4.0).abs() < 1e-4);
}

#[test]
fn dual_expression_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let behavior = dir.path().join("b.json");
    // Equal mixture of a PR box and the all-zero deterministic point.
    let mut table = Vec::new();
    for x in 0..2 {
        for y in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    let pr = if (a ^ b) == (x & y) { 1 } else { 0 };
                    let det = if a == 0 && b == 0 { 2 } else { 0 };
                    table.push(format!("{}/4", pr + det));
                }
            }
        }
    }
    let doc = serde_json::json!({ "scenario": [2, 2, 2, 2], "table": table });
    std::fs::write(&behavior, doc.to_string()).unwrap();
    let expr = dir.path().join("e.json");
    let (code, r) = run(&["dual-expression", path(&behavior), "--expression", path(&expr)]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["q_l"]["exact"], "1/2");
    assert_eq!(r["results"]["value_on_behavior"]["exact"], "1/2");
    assert!(expr.exists());
}

#[test]
fn bad_inputs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, r#"{"scenario": [2, 2, 2, 2], "table": ["1/2"]}"#).unwrap();
    let (code, msg) = run(&["local-content", path(&broken)]);
    assert_eq!(code, 1);
    assert!(msg.as_str().unwrap().contains("error"));

    assert_eq!(run(&["local-content", path(&dir.path().join("missing.json"))]).0, 1);
    assert_eq!(run(&["cntz-enum", "2,2,2"]).0, 1);
    assert_eq!(run(&["builtin", "nope"]).0, 1);
}

#[test]
fn reports_are_deterministic_apart_from_timing() {
    let strip = |mut r: Value| {
        r.as_object_mut().unwrap().remove("timing_seconds");
        r
    };
    let a = run(&["cntz-enum", "2,2,2,2", "--seed", "3"]);
    let b = run(&["cntz-enum", "2,2,2,2", "--seed", "3"]);
    assert_eq!(a.0, 0);
    assert_eq!(strip(a.1), strip(b.1));
}

#[test]
fn hardy_fixture_is_realizable() {
    let (code, r) = run(&["realizable", path(&fixture("hardy.json"))]);
    assert_eq!(code, 0);
    assert!(r["results"]["witness"]["alice"].is_array());
}
