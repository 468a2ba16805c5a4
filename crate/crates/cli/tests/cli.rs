use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqtwist"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const SYNTHETIC: &[&str] = &[
    "certify",
    "--curve",
    "0,0,0,0,17",
    "-N",
    "400",
    "--synthetic-height",
    "80",
    "--brute",
    "--out",
    "cert.json",
];

#[test]
fn density_prints_the_exponential_sum() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.txt"), "1\n2\n3\n").unwrap();
    let o = run(dir.path(), &["density", "--t", "1", "s.txt"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("f = 0.5530018"), "{}", stdout(&o));
}

#[test]
fn brute_find_on_first_six_integers() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.txt"), "N=6\n1\n2\n3\n4\n5\n6\n").unwrap();
    let o = run(dir.path(), &["find", "--n", "2", "--brute", "s.txt"]);
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines[0], "c=1; gens=2,3; elements=1,2,3,6");
}

#[test]
fn find_writes_records_with_config_header() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.txt"), "N=6\n1\n2\n3\n4\n5\n6\n").unwrap();
    let o = run(
        dir.path(),
        &["find", "--n", "2", "--brute", "s.txt", "--out", "p.txt", "--report", "r.json"],
    );
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("p.txt")).unwrap();
    assert!(text.starts_with("# config: {\"subcommand\":\"find\""));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["found"], 2);
    assert_eq!(report["config"]["finder"], "brute");
}

#[test]
fn guided_find_on_a_small_set_is_exhausted() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.txt"), "N=6\n1\n2\n3\n4\n5\n6\n").unwrap();
    let o = run(dir.path(), &["find", "s.txt", "--report", "r.json"]);
    assert_eq!(o.status.code(), Some(1));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["exhausted"]["reason"]["reason"], "universe_underflow");
}

#[test]
fn certify_then_verify_and_reject_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), SYNTHETIC);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).trim_end().ends_with("Valid"));

    let o = run(dir.path(), &["verify", "cert.json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "Valid");

    let path = dir.path().join("cert.json");
    let mut cert: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(cert["schema"], "sqtwist-certificate/v1");
    assert_eq!(cert["metadata"]["run_config"]["subcommand"], "certify");
    let y = cert["entries"]["1"]["witness"]["y"].as_str().unwrap().to_string();
    cert["entries"]["1"]["witness"]["y"] = format!("-{y}").replace("--", "").into();
    fs::write(&path, serde_json::to_string(&cert).unwrap()).unwrap();
    let o = run(dir.path(), &["verify", "cert.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("Invalid"));

    fs::write(&path, "{ not json").unwrap();
    assert_eq!(run(dir.path(), &["verify", "cert.json"]).status.code(), Some(1));
}

#[test]
fn exhausted_guided_search_falls_back_to_brute_force() {
    let dir = tempfile::tempdir().unwrap();
    let guided: Vec<&str> = SYNTHETIC.iter().copied().filter(|&a| a != "--brute").collect();
    let o = run(dir.path(), &guided);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("falling back to brute force"));
    let cert: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("cert.json")).unwrap()).unwrap();
    assert_eq!(cert["metadata"]["finder"], "guided+brute");
    assert!(cert["metadata"]["run_config"]["extra"]["guided_exhausted"].is_object());

    let strict: Vec<&str> = guided.iter().copied().chain(["--no-fallback"]).collect();
    let o = run(dir.path(), &strict);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("guided search exhausted"));
}

#[test]
fn identical_configs_give_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(run(a.path(), SYNTHETIC).status.code(), Some(0));
    assert_eq!(run(b.path(), SYNTHETIC).status.code(), Some(0));
    let read = |d: &Path| fs::read(d.join("cert.json")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn sieve_outputs_feed_find_and_certify() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "sieve", "-N", "300", "--search-bound", "2000", "--out", "s.txt", "--witnesses", "w.json",
            "--checkpoint", "ck.jsonl", "--threads", "2",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let set = fs::read_to_string(dir.path().join("s.txt")).unwrap();
    assert!(set.starts_with("# config: "));
    assert!(set.contains("\"twist_bound\":300"));
    assert!(dir.path().join("ck.jsonl").exists());

    let o = run(dir.path(), &["find", "--n", "1", "--brute", "s.txt"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("c="));

    let o = run(
        dir.path(),
        &["certify", "-N", "300", "--witnesses", "w.json", "--n", "1", "--brute", "--out", "c.json"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(run(dir.path(), &["verify", "c.json"]).status.code(), Some(0));
}

#[test]
fn diagnose_reports_pair_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["diagnose", "--full", "5000", "--big-t", "100", "--out", "d.json"]);
    // the pointwise sieve bound fails near t = 1 for a full interval
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("threshold 0.0138889"));
    assert!(out.contains("FAIL") && out.contains("sieve step at t=1"));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("d.json")).unwrap()).unwrap();
    assert_eq!(doc["report"]["pairs"].as_array().unwrap().len(), 6);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.txt"), "1\n2\n").unwrap();
    for args in [
        &["find", "--bogus"][..],
        &["find", "s.txt", "--n", "0"],
        &["find", "missing.txt"],
        &["find", "s.txt", "--window", "9,3"],
        &["sieve", "--curve", "0,0,0,0,0", "--out", "x.txt"],
        &["sieve", "--curve", "0,0,0,0,17", "--parity", "--out", "x.txt"],
        &["verify", "missing.json"],
        &["--threads", "0", "diagnose", "--full", "10"],
    ] {
        let o = run(dir.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
    assert!(!dir.path().join("x.txt").exists());
}

#[test]
fn help_lists_every_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["--help"]);
    let text = stdout(&o);
    for sub in ["sieve", "density", "find", "certify", "verify", "diagnose"] {
        assert!(text.contains(sub), "{sub}");
    }
}
