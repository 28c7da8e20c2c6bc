use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn idex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_idex"))
        .args(args)
        .output()
        .expect("spawn idex")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

const REFERENCE: [&str; 11] = [
    "analyze", "--c", "10", "--ds", "15", "--db", "15", "--vs", "10", "--vb", "10",
];

#[test]
fn analyze_reference_point_text() {
    let out = idex(&REFERENCE);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("Confirmation      (0, 0)              (-10, 20)"), "{text}");
    assert!(text.contains("NoConfirmation    (-5, -25)           (-15, -5)"), "{text}");
    assert!(text.contains("Nash: (Confirmation, FailedSending)"), "{text}");
    assert!(text.contains("revised: (CorrectSending, Confirmation)"), "{text}");
    assert!(text.contains("fair: true"), "{text}");
}

#[test]
fn analyze_structured_is_one_json_document() {
    let mut args = REFERENCE.to_vec();
    args.extend(["--format", "structured"]);
    let out = idex(&args);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json");
    assert_eq!(v["fairness"]["fair"], serde_json::Value::Bool(true));
    assert_eq!(v["matrix"].as_array().map(Vec::len), Some(4));
}

#[test]
fn analyze_flags_small_seller_deposit() {
    let out = idex(&["analyze", "--c", "10", "--ds", "5", "--db", "15", "--vs", "10", "--vb", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("condition d_s > c: VIOLATED"), "{text}");
    assert!(text.contains("fair: false"), "{text}");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(idex(&["analyze", "--c", "10", "--ds", "15", "--db", "15", "--vs", "10"]).status.code(), Some(2));
    assert_eq!(idex(&["analyze", "--c", "-1", "--ds", "15", "--db", "15", "--vs", "10", "--vb", "1"]).status.code(), Some(2));
    let mut unknown = REFERENCE.to_vec();
    unknown.push("--bogus");
    assert_eq!(idex(&unknown).status.code(), Some(2));
    assert_eq!(idex(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn run_honest_config_settles_and_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("honest.trace");
    let cfg = configs_dir().join("honest.toml");
    let out = idex(&["run", cfg.to_str().unwrap(), "--trace", trace.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("phase: Settled"), "{text}");
    assert!(text.contains("realized profile: (Confirmation, CorrectSending)"), "{text}");
    let lines = fs::read_to_string(&trace).unwrap();
    assert_eq!(lines.lines().next(), Some("0|-|AwaitingDeposits|deploy|seller|0"));
    assert!(lines.lines().last().unwrap().contains("|Settled|"), "{lines}");
}

#[test]
fn run_corrupt_config_forfeits_and_explains() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("corrupt.trace");
    let cfg = configs_dir().join("corrupt.toml");
    let out = idex(&["--format", "structured", "run", cfg.to_str().unwrap(), "--trace", trace.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "protocol failure is not a process failure");
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json");
    assert_eq!(v["phase"], "Forfeited");
    assert_eq!(v["forfeiture"], "Blocked");
    assert!(v["proof_failure"].as_str().is_some_and(|s| !s.is_empty()));
    assert_eq!(v["trace_file"], trace.to_str().unwrap());
    assert_eq!(v["buyer"]["utility"], -15);
    assert_eq!(v["seller"]["utility"], -5);
    assert!(trace.exists());
}

#[test]
fn run_strategy_override() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t");
    let cfg = configs_dir().join("honest.toml");
    let out = idex(&[
        "run",
        cfg.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
        "--seller",
        "withhold-key",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("phase: Forfeited"));
}

#[test]
fn run_rejects_missing_and_malformed_configs() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml");
    let out = idex(&["run", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read config"));

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "seed = 1\n[game]\nc = 10\nds = 15\ndb = 15\nvs = 10\nvb = 10\nextra = 3\n").unwrap();
    assert_eq!(idex(&["run", bad.to_str().unwrap()]).status.code(), Some(2));

    let small_deposit = dir.path().join("small.toml");
    fs::write(&small_deposit, "[game]\nc = 10\nds = 5\ndb = 15\nvs = 10\nvb = 10\n").unwrap();
    assert_eq!(idex(&["run", small_deposit.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn demo_pre_is_reproducible_and_recovers() {
    let a = idex(&["demo-pre", "--q", "11", "--seed", "3"]);
    let b = idex(&["demo-pre", "--q", "11", "--seed", "3"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert_eq!(text.lines().last(), Some("m recovered: true"));
    for step in ["keygen A:", "encrypt:", "rekeygen:", "reencrypt:", "decrypt:"] {
        assert!(text.contains(step), "missing {step}: {text}");
    }
}

#[test]
fn demo_pre_over_many_seeds() {
    for seed in 0..20 {
        let out = idex(&["--format", "structured", "demo-pre", "--q", "101", "--seed", &seed.to_string()]);
        assert_eq!(out.status.code(), Some(0));
        let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json");
        assert_eq!(v["m_recovered"], true);
        assert_eq!(v["recovered"], v["mu"]);
    }
}

#[test]
fn demo_pre_rejects_composite_order() {
    let out = idex(&["demo-pre", "--q", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}
