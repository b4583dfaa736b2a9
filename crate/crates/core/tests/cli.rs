use std::process::{Command, Output};

use serde_json::Value;

fn polimage(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polimage"))
        .args(args)
        .env_remove("POLIMAGE_THREADS")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = polimage(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).expect("valid JSON");
    assert_eq!(v["schema"], 1);
    v
}

#[test]
fn classify_examples() {
    let v = json(&["classify", "--poly", "[x1,x2]", "--vars", "2", "--char", "0"]);
    assert_eq!(v["result"]["verdict"], "SL2");
    for key in ["witnesses", "assumptions", "mode", "seed", "budget_consumed", "diagnostics"] {
        assert!(v["result"].get(key).is_some(), "missing {key}");
    }
    let v = json(&["classify", "--poly", "s4", "--vars", "4", "--char", "0"]);
    assert_eq!(v["result"]["verdict"], "Zero");
    let v = json(&["classify", "--poly", "[x1,x2]^2*x1", "--vars", "2", "--char", "0"]);
    assert_eq!(v["result"]["verdict"], "Dense");
}

#[test]
fn classify_modes_and_weights() {
    let v = json(&["classify", "--poly", "[x1,x2]^2*x1", "--mode", "probabilistic", "--seed", "3"]);
    assert_eq!(v["result"]["verdict"], "Dense");
    assert_eq!(v["result"]["mode"], "probabilistic");
    assert!(v["result"]["probe"]["zero_test_error_bound"].is_string());
    let v = json(&["classify", "--poly", "x1^2 + x2^3", "--weights", "3,2"]);
    assert_eq!(v["result"]["verdict"], "Dense");
    assert_eq!(v["result"]["weights"], serde_json::json!([3, 2]));
}

#[test]
fn enumerate_examples() {
    let v = json(&["enumerate", "--poly", "[x1,x2]", "--field", "2"]);
    assert_eq!(v["report"]["image_size"], 8);
    assert_eq!(v["report"]["span_tag"], "sl2");
    let v = json(&["enumerate", "--poly", "x1", "--field", "3"]);
    assert_eq!(v["report"]["image_size"], 81);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s4.txt");
    let v = json(&["enumerate", "--poly", "s4", "--field", "2", "--dump", path.to_str().unwrap()]);
    assert_eq!(v["report"]["image_size"], 1);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "0,0;0,0\n");
}

#[test]
fn corpus_examples() {
    for name in ["commutator", "coneex2-iv", "nondense"] {
        let v = json(&["corpus", "--only", name]);
        assert_eq!(v["failed"], 0, "{name}");
        assert_eq!(v["entries"][0]["pass"], true, "{name}");
    }
    let v = json(&["corpus", "--only", "coneex2-iv"]);
    let counts = &v["entries"][0]["result"]["probe"]["class_counts"];
    assert!(counts.get("KTilde").is_none());
    assert!(counts["Scalar"].as_u64().unwrap() > 0);
    assert!(counts["Nilpotent"].as_u64().unwrap() > 0);
}

#[test]
fn small_commands() {
    let v = json(&["cone", "--matrix", "1,1;0,1", "--char", "0"]);
    assert_eq!(v["class"], "KTilde");
    let v = json(&["euler", "--units", "e12,e12"]);
    assert_eq!(v["verdict"]["kind"], "NoPathOrCircuit");
    let v = json(&["euler", "--units", "e12,e21", "--poly", "[x1,x2]"]);
    assert_eq!(v["verdict"]["kind"], "CircuitClass");
    assert_eq!(v["value"], "1,0;0,-1");
    assert_eq!(v["compatible"], true);
    let v = json(&["verify", "--identity", "alternating-trace", "--field", "101", "--trials", "100", "--seed", "7"]);
    assert_eq!(v["report"]["all_hold"], true);
    assert_eq!(v["report"]["linear_in_t"], true);
    assert_eq!(v["report"]["records"].as_array().unwrap().len(), 100);
    let v = json(&["linearize", "--poly", "x1^2"]);
    assert_eq!(v["polynomial"], "x1*x2 + x2*x1");
}

#[test]
fn exit_codes() {
    let out = polimage(&["classify", "--poly", "[x1,x2", "--vars", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("position"));

    let out = polimage(&["classify", "--poly", "x1", "--char", "4"]);
    assert_eq!(out.status.code(), Some(2));

    let out = polimage(&["classify", "--poly", "[x1,x2]^2*x1", "--mode", "symbolic", "--budget", "5"]);
    assert_eq!(out.status.code(), Some(3));

    let out = polimage(&["enumerate", "--poly", "x1*x2*x3*x1", "--field", "5", "--budget", "1000"]);
    assert_eq!(out.status.code(), Some(3));

    let out = polimage(&["enumerate", "--poly", "x1", "--field", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pretty_output() {
    let out = polimage(&["--pretty", "corpus", "--only", "commutator"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("PASS  commutator"));
    let out = polimage(&["--pretty", "cone", "--matrix", "0,1;0,0"]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("class: Nilpotent"));
}

#[test]
fn thread_setting_does_not_change_output() {
    let args = ["classify", "--poly", "[x1,x2]^3", "--seed", "5"];
    let a = polimage(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_polimage")).args(args).env("POLIMAGE_THREADS", "1").output().unwrap();
    let c = polimage(&[&["--threads", "3"][..], &args[..]].concat());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}
