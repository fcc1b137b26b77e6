use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn polaris(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polaris"))
        .args(args)
        .env_remove("POLARIS_CONFIG")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = polaris(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

/// Default corpus generated, ingested and profiled in `dir`.
fn pipeline(dir: &Path) -> PathBuf {
    ok(&["generate", "--out", &p(dir, "t.jsonl"), "--seed", "42"]);
    ok(&["ingest", "--trace", &p(dir, "t.jsonl"), "--out", &p(dir, "ex.jsonl"), "--report", &p(dir, "rep.json")]);
    ok(&["profile", "--executions", &p(dir, "ex.jsonl"), "--out", &p(dir, "store.json")]);
    dir.join("store.json")
}

#[test]
fn default_corpus_ingests_completely() {
    let dir = TempDir::new().unwrap();
    pipeline(dir.path());
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("rep.json")).unwrap()).unwrap();
    assert_eq!(report["executions_ok"], 1600);
    assert_eq!(report["executions_rejected"], 0);
}

#[test]
fn generation_is_byte_identical_per_seed() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(&["generate", "--out", &p(d, "a.jsonl"), "--seed", "7"]);
    ok(&["generate", "--out", &p(d, "b.jsonl"), "--seed", "7"]);
    ok(&["generate", "--out", &p(d, "c.jsonl"), "--seed", "8"]);
    let read = |n| fs::read(d.join(n)).unwrap();
    assert_eq!(read("a.jsonl"), read("b.jsonl"));
    assert_ne!(read("a.jsonl"), read("c.jsonl"));
    let strict = polaris(&["generate", "--out", &p(d, "s.jsonl"), "--strict-targets"]);
    assert_eq!(strict.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&strict.stderr).contains("INFEASIBLE_TARGET"));
}

#[test]
fn ingest_exit_codes() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let good = [
        r#"{"ts_ms": 0, "layer": "RRC", "event": "RRC_TRIGGER", "mech": "BWP"}"#,
        r#"{"ts_ms": 2, "layer": "L2", "event": "CONFIG_START"}"#,
        r#"{"ts_ms": 5, "layer": "L2", "event": "BWP_APPLY"}"#,
        r#"{"ts_ms": 8.25, "layer": "L2", "event": "CONFIG_COMPLETE"}"#,
    ];
    fs::write(d.join("good.jsonl"), good.join("\n")).unwrap();
    ok(&["ingest", "--trace", &p(d, "good.jsonl"), "--out", &p(d, "e.jsonl"), "--mode", "strict"]);

    // out-of-template milestone inside the execution
    let mut corrupted = good.to_vec();
    corrupted.insert(2, r#"{"ts_ms": 3, "layer": "ML1", "event": "SSB_DETECT"}"#);
    fs::write(d.join("bad.jsonl"), corrupted.join("\n")).unwrap();
    let out = polaris(&["ingest", "--trace", &p(d, "bad.jsonl"), "--out", &p(d, "e.jsonl"), "--mode", "strict"]);
    assert_eq!(out.status.code(), Some(1));
    ok(&["ingest", "--trace", &p(d, "bad.jsonl"), "--out", &p(d, "e.jsonl"), "--mode", "strict", "--allow-rejects"]);
    ok(&["ingest", "--trace", &p(d, "bad.jsonl"), "--out", &p(d, "e.jsonl")]);

    fs::write(d.join("garbage.jsonl"), "garbage\n").unwrap();
    let out = polaris(&["ingest", "--trace", &p(d, "garbage.jsonl"), "--out", &p(d, "e.jsonl")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("MALFORMED_LINE"));

    let out = polaris(&["ingest", "--trace", &p(d, "missing.jsonl"), "--out", &p(d, "e.jsonl")]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn profile_is_idempotent_and_flags_ineligible_rows() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    pipeline(d);
    let table1 = ok(&["profile", "--executions", &p(d, "ex.jsonl"), "--out", &p(d, "s1.json"), "--table", &p(d, "t1.csv")]);
    let table2 = ok(&["profile", "--executions", &p(d, "ex.jsonl"), "--out", &p(d, "s2.json"), "--table", &p(d, "t2.csv")]);
    assert_eq!(table1, table2);
    assert_eq!(fs::read(d.join("s1.json")).unwrap(), fs::read(d.join("s2.json")).unwrap());
    assert_eq!(fs::read(d.join("t1.csv")).unwrap(), fs::read(d.join("t2.csv")).unwrap());
    // NR R&R has 5 executions; with min_n 10 it is listed but ineligible
    let table = ok(&["profile", "--executions", &p(d, "ex.jsonl"), "--out", &p(d, "s3.json"), "--min-n", "10"]);
    let rr = table.lines().find(|l| l.starts_with("NR R&R")).unwrap();
    assert!(rr.contains("ineligible (too few samples)"), "{rr}");
    assert!(table.lines().find(|l| l.starts_with("BWP")).unwrap().contains("328."));
}

#[test]
fn score_and_simulate() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let store = pipeline(d);
    let store = store.to_str().unwrap();
    let decision: serde_json::Value = serde_json::from_str(&ok(&["score", "--store", store])).unwrap();
    assert_eq!(decision["selected"], "BWP");
    assert_eq!(decision["candidates"].as_array().unwrap().len(), 7);

    let out = polaris(&["score", "--store", store, "--scenario", "no-BWP", "--policy", "always-bwp"]);
    assert_eq!(out.status.code(), Some(2));
    let out = polaris(&["score", "--store", store, "--lambda", "1.5"]);
    assert_eq!(out.status.code(), Some(1));
    let out = polaris(&["score", "--store", store, "--scenario", "wifi-only"]);
    assert_eq!(out.status.code(), Some(1));

    let summary: serde_json::Value = serde_json::from_str(&ok(&[
        "simulate", "--store", store, "--scenario", "no-BWP", "--count", "100", "--policy", "always-bwp", "--telemetry", &p(d, "tel.jsonl"),
    ]))
    .unwrap();
    assert_eq!(summary["failures"], 100);
    let failed = fs::read_to_string(d.join("tel.jsonl")).unwrap().lines().filter(|l| l.contains("ACTIVATION_FAILED")).count();
    assert_eq!(failed, 100);

    fs::write(d.join("events.jsonl"), "{\"time_ms\": 0, \"carrier_id\": \"c1\", \"scenario\": \"unconstrained\"}\n{\"time_ms\": 5, \"carrier_id\": \"c2\", \"scenario\": \"LTE-only\"}\n").unwrap();
    let summary: serde_json::Value = serde_json::from_str(&ok(&[
        "simulate", "--store", store, "--events", &p(d, "events.jsonl"), "--telemetry", &p(d, "tel2.jsonl"), "--seed", "3",
    ]))
    .unwrap();
    assert_eq!(summary["activations"], 2);
    assert_eq!(summary["failures"], 0);
}

#[test]
fn evaluate_marks_failed_cells() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let store = pipeline(d);
    let out = ok(&[
        "evaluate", "--store", store.to_str().unwrap(), "--out-json", &p(d, "m.json"), "--out-csv", &p(d, "m.csv"), "--seeds", "0,1", "--events", "100",
    ]);
    assert!(out.lines().any(|l| l.starts_with("unconstrained") && l.contains("stable=true") && l.ends_with("BWP")));
    let csv = fs::read_to_string(d.join("m.csv")).unwrap();
    let row = csv.lines().find(|l| l.starts_with("no-BWP,always_bwp,")).unwrap();
    assert!(row.contains("FAILED"));
    assert_eq!(csv.lines().count(), 1 + 5 * 29);
}

#[test]
fn report_bundle() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(&["generate", "--out", &p(d, "t.jsonl"), "--scale", "5"]);
    ok(&["ingest", "--trace", &p(d, "t.jsonl"), "--out", &p(d, "ex.jsonl"), "--report", &p(d, "r.json")]);
    ok(&["profile", "--executions", &p(d, "ex.jsonl"), "--out", &p(d, "store.json"), "--window", "10000"]);
    ok(&["report", "--store", &p(d, "store.json"), "--out-dir", &p(d, "csv")]);
    let fig2b = fs::read_to_string(d.join("csv/fig2b_exceedance_rrc_phy.csv")).unwrap();
    let bwp_1000: f64 = fig2b
        .lines()
        .find(|l| l.starts_with("BWP,1000.0,"))
        .and_then(|l| l.rsplit(',').next())
        .unwrap()
        .parse()
        .unwrap();
    assert!(bwp_1000 > 0.5);
    let shares = fs::read_to_string(d.join("csv/stage_shares.csv")).unwrap();
    for l in shares.lines().filter(|l| l.starts_with("RR_") && l.contains("PBCH_MIB_DECODE->SIB1_ACQ")) {
        let share: f64 = l.rsplit(',').next().unwrap().parse().unwrap();
        assert!((0.80..=0.95).contains(&share), "{l}");
    }

    // one mechanism only
    let ex = fs::read_to_string(d.join("ex.jsonl")).unwrap();
    let bwp: String = ex.lines().filter(|l| l.contains("\"mechanism\":\"BWP\"")).map(|l| format!("{l}\n")).collect();
    fs::write(d.join("bwp.jsonl"), bwp).unwrap();
    ok(&["profile", "--executions", &p(d, "bwp.jsonl"), "--out", &p(d, "bwp.json")]);
    ok(&["report", "--store", &p(d, "bwp.json"), "--out-dir", &p(d, "one")]);
    assert_eq!(fs::read_to_string(d.join("one/fig1_median.csv")).unwrap().lines().count(), 2);
}

#[test]
fn tampered_store_is_rejected() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let store = pipeline(d);
    let text = fs::read_to_string(&store).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["profiles"]["BWP"]["mean_phy"] = serde_json::json!(1.0);
    fs::write(d.join("bad.json"), v.to_string()).unwrap();
    let out = polaris(&["score", "--store", &p(d, "bad.json")]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_and_help() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let store = pipeline(d);
    fs::write(
        d.join("cfg.json"),
        r#"{"scenarios": [{"name": "nr-only", "allowed": ["HO_NR", "RR_NR"]}], "store": {"min_n": 3}}"#,
    )
    .unwrap();
    let decision: serde_json::Value =
        serde_json::from_str(&ok(&["--config", &p(d, "cfg.json"), "score", "--store", store.to_str().unwrap(), "--scenario", "nr-only"])).unwrap();
    assert_eq!(decision["scenario"], "nr-only");
    let out = Command::new(env!("CARGO_BIN_EXE_polaris"))
        .args(["score", "--store", store.to_str().unwrap(), "--scenario", "nr-only"])
        .env("POLARIS_CONFIG", d.join("cfg.json"))
        .output()
        .unwrap();
    assert!(out.status.success());
    for cmd in ["generate", "simulate", "evaluate"] {
        let help = ok(&[cmd, "--help"]);
        assert!(help.contains("seed"), "{cmd} --help does not document its seed");
    }
}
