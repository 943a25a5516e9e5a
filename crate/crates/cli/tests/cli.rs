use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_maxchains"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn run_with_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = bin().args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped()).spawn().unwrap();
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn construct_then_count_through_a_pipe() {
    let tower = run(&["construct", "tower", "--n", "4", "--t", "2"]);
    assert!(tower.status.success());
    let counted = run_with_stdin(&["count", "-"], &tower.stdout);
    assert_eq!(counted.status.code(), Some(0));
    assert_eq!(stdout(&counted).trim(), "4");

    let tower = run(&["--format", "json", "construct", "gentower", "--sizes", "2,3"]);
    let counted = run_with_stdin(&["count", "-", "--format", "json", "--oracle"], &tower.stdout);
    let v = json(&counted);
    assert_eq!(v["chains"], "12");
    assert_eq!(v["oracle"], "12");
    assert_eq!(v["size"], 11);
    assert_eq!(v["lemma2"]["holds"], true);
}

#[test]
fn count_reads_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t2.txt");
    std::fs::write(&path, "4\n0\n1\n2\n3\n7\nb\nf\n").unwrap();
    let o = run(&["count", path.to_str().unwrap()]);
    assert_eq!(stdout(&o).trim(), "4");
    std::fs::write(&path, "4\n0\n0\n").unwrap();
    assert_eq!(run(&["count", path.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["count", "/nonexistent/file"]).status.code(), Some(2));
}

#[test]
fn compression_keeps_size_and_chains() {
    let system = b"3\n0\n4\n7\n";
    let o = run_with_stdin(&["compress", "-", "--left"], system);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "3\n0\n1\n7\n");
    let o = run_with_stdin(&["compress", "-", "--i", "1", "--j", "3", "--format", "json"], system);
    assert_eq!(json(&o)["sets"], serde_json::json!([0, 1, 7]));
    assert_eq!(run_with_stdin(&["compress", "-"], system).status.code(), Some(2));
    assert_eq!(run_with_stdin(&["compress", "-", "--i", "2", "--j", "2"], system).status.code(), Some(2));
}

#[test]
fn search_output_and_guards() {
    let o = run(&["--format", "json", "search", "--n", "4", "--m", "7"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["max_chains"], "4");
    assert_eq!(v["witness_count"], "1");
    assert_eq!(run(&["search", "--n", "8", "--m", "20"]).status.code(), Some(2));
    assert_eq!(run(&["search", "--n", "4"]).status.code(), Some(2));
    let o = run(&["search", "--n", "4", "--two-per-layer", "--format", "json"]);
    assert_eq!(json(&o)["max_chains"], "5");
}

#[test]
fn search_manifest_reproduces_payload() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("run.json");
    let manifest = dir.path().join("m1.json");
    let args = |workers: &str, manifest: &str| {
        vec![
            "search".to_string(),
            "--n".into(),
            "6".into(),
            "--m".into(),
            "15".into(),
            "--workers".into(),
            workers.into(),
            "--manifest".into(),
            manifest.into(),
        ]
    };
    let first = bin().args(args("1", manifest.to_str().unwrap())).output().unwrap();
    assert!(first.status.success());
    let m2 = dir.path().join("m2.json");
    let second = bin()
        .args(args("8", m2.to_str().unwrap()))
        .args(["--checkpoint", ckpt.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(second.status.success());
    let read = |p: &std::path::Path| -> Value { serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap() };
    let (a, b) = (read(&manifest), read(&m2));
    assert_eq!(a["result"], b["result"]);
    assert_eq!(a["result"]["max_chains"], "36");
    assert!(a["result"].get("nodes_explored").is_none());
    assert!(a["stats"]["nodes_explored"].as_u64().unwrap() > 0);
    assert!(dir.path().join("run.manifest.json").exists());
    assert!(ckpt.exists());
}

#[test]
fn manifest_records_input_digest() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("m.json");
    let o = run_with_stdin(&["count", "-", "--manifest", manifest.to_str().unwrap()], b"2\n0\n1\n3\n");
    assert!(o.status.success());
    let m: Value = serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m["inputs"][0]["path"], "-");
    assert_eq!(m["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert_eq!(m["result"]["chains"], "1");
    assert_eq!(m["parameters"]["count"]["file"], "-");
}

#[test]
fn theorem3_reports_exact_values() {
    let o = run(&["--format", "json", "theorem3", "--alpha", "1/2", "--epsilon", "0.25", "--n", "12"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["plan"]["k"], 4);
    assert_eq!(v["plan"]["beta"], "9/16");
    assert_eq!(v["realization"]["n"], 12);
    assert!(v["realization"]["probability"].as_str().unwrap().contains('/'));
    assert_eq!(run(&["theorem3", "--alpha", "1", "--epsilon", "1/4"]).status.code(), Some(2));
    assert_eq!(run(&["theorem3", "--alpha", "x", "--epsilon", "1/4"]).status.code(), Some(2));
}

#[test]
fn poset_commands() {
    let t2 = b"4\n1 < 3\n2 < 3\n1 < 4\n2 < 4\n";
    assert_eq!(stdout(&run_with_stdin(&["poset", "count-ext", "-"], t2)).trim(), "4");
    assert_eq!(stdout(&run_with_stdin(&["poset", "count-antichains", "-"], t2)).trim(), "7");
    let v = json(&run(&["--format", "json", "poset", "search", "--n", "3", "--m", "8"]));
    assert_eq!(v["max_extensions"], "6");
    assert_eq!(run(&["poset", "search", "--n", "7", "--m", "8"]).status.code(), Some(2));
    assert_eq!(run_with_stdin(&["poset", "count-ext", "-"], b"2\n1 < 2\n2 < 1\n").status.code(), Some(2));
}

#[test]
fn grid_commands() {
    let o = run_with_stdin(&["grid", "count", "-"], b"3 2\n1 1\n1 2\n2 1\n2 2\n3 2\n2 3\n3 3\n");
    assert_eq!(stdout(&o).trim(), "4");
    let v = json(&run(&["grid", "search", "--k", "3", "--m", "9", "--format", "json"]));
    assert_eq!(v["max_chains"], "6");
    let one = json(&run(&["grid", "search", "--k", "4", "--m", "10", "--format", "json", "--workers", "1"]));
    let many = json(&run(&["grid", "search", "--k", "4", "--m", "10", "--format", "json", "--workers", "8"]));
    assert_eq!(one["witnesses"], many["witnesses"]);
    assert_eq!(run(&["grid", "search", "--k", "6", "--m", "9"]).status.code(), Some(2));
}

#[test]
fn verify_suites_and_exit_codes() {
    let o = run(&["verify", "compression", "--trials", "5000", "--n", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("compression PASS"));
    let v = json(&run(&["verify", "towers", "--format", "json"]));
    assert_eq!(v["passed"], true);
    assert_eq!(run(&["verify", "nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}
