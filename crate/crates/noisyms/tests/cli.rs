use std::fs;
use std::path::Path;
use std::process::Command;

use noisyms::output::{read_manifest, MANIFEST_NAME};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_noisyms"))
}

fn run_ok(args: &[&str]) -> String {
    let out = bin().args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}\n{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn run_err(args: &[&str]) -> String {
    let out = bin().args(args).output().unwrap();
    assert!(!out.status.success(), "{args:?} unexpectedly succeeded");
    String::from_utf8(out.stderr).unwrap()
}

fn csv_column(path: &Path, name: &str) -> Vec<String> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let idx = rdr.headers().unwrap().iter().position(|h| h == name).unwrap();
    rdr.records().map(|r| r.unwrap()[idx].to_string()).collect()
}

#[test]
fn de_trace_reproduces_the_full_depth_table_entry() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    run_ok(&["de-trace", "--out", out, "--mu", "1", "--chi", "0.06", "--adder", "full-depth", "--p-a", "1e-15"]);
    let pe = csv_column(&dir.path().join("de_trace.csv"), "pe");
    let last: f64 = pe.last().unwrap().parse().unwrap();
    assert!((last / 8.5e-16 - 1.0).abs() < 0.01, "{last:e}");
    let m = read_manifest(&dir.path().join(MANIFEST_NAME)).unwrap();
    assert_eq!(m.command, "de-trace");
    assert_eq!(m.params["p_a"], 1e-15);
    assert_eq!(m.outputs.len(), 2);
}

#[test]
fn clean_channel_simulation_has_zero_ber() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    run_ok(&["simulate", "--out", out, "--n", "120", "--chi", "0,0", "--frames", "40", "--seed", "1"]);
    let ber = csv_column(&dir.path().join("simulate.csv"), "ber");
    assert_eq!(ber, vec!["0.0", "0.0"]);
    assert_eq!(csv_column(&dir.path().join("simulate.csv"), "avg_iters"), vec!["1.0", "1.0"]);
}

#[test]
fn configuration_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let msg = run_err(&["de-trace", "--out", out, "--q", "5", "--q-tilde", "5"]);
    assert!(msg.contains("q̃=5 must exceed message width q=5"), "{msg}");
    let msg = run_err(&["simulate", "--out", out, "--q", "5", "--q-tilde", "4", "--seed", "1"]);
    assert!(msg.contains("must exceed"), "{msg}");
    let msg = run_err(&["de-trace", "--no-such-flag"]);
    assert!(msg.contains("--no-such-flag"), "{msg}");
    let msg = run_err(&["simulate", "--out", out]);
    assert!(msg.contains("--seed"), "{msg}");
    let msg = run_err(&["simulate", "--out", out, "--seed", "1", "--alist", "/nonexistent/code.alist"]);
    assert!(msg.contains("reading alist"), "{msg}");
    let msg = run_err(&["de-trace", "--out", out, "--chi", "0.7"]);
    assert!(msg.contains("0.7"), "{msg}");
}

#[test]
fn flags_override_config_which_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("lab.toml");
    fs::write(&cfg, "[de-trace]\nmu = 6\nchi = 0.05\nrules = \"sweep\"\n").unwrap();
    let out = dir.path().join("a");
    run_ok(&["--config", cfg.to_str().unwrap(), "de-trace", "--out", out.to_str().unwrap(), "--mu", "2"]);
    let m = read_manifest(&out.join(MANIFEST_NAME)).unwrap();
    assert_eq!(m.params["mu"], 2.0);
    assert_eq!(m.params["chi"], 0.05);
    assert_eq!(m.params["q_tilde"], 5);
    fs::write(&cfg, "[de-trace]\nmoo = 6\n").unwrap();
    let msg = run_err(&["--config", cfg.to_str().unwrap(), "de-trace", "--out", out.to_str().unwrap()]);
    assert!(msg.contains("moo"), "{msg}");
}

#[test]
fn manifests_replay_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    run_ok(&[
        "simulate", "--out", first.to_str().unwrap(), "--jobs", "1", "--n", "120", "--variant", "scms", "--mu", "2",
        "--p-a", "0.01", "--p-c", "0.01", "--p-x", "0.001", "--p-scu", "0.001", "--chi", "0.05,0.07",
        "--frame-errors", "5", "--max-frames", "2000", "--seed", "auto",
    ]);
    let m = read_manifest(&first.join(MANIFEST_NAME)).unwrap();
    assert!(m.seed.is_some());
    assert_eq!(m.params["seed"].as_u64(), m.seed);
    let second = dir.path().join("second");
    let text = run_ok(&[
        "rerun", first.join(MANIFEST_NAME).to_str().unwrap(), "--out", second.to_str().unwrap(), "--jobs", "3",
    ]);
    assert!(text.contains("byte-identically"), "{text}");
    for f in &m.outputs {
        assert_eq!(fs::read(first.join(&f.path)).unwrap(), fs::read(second.join(&f.path)).unwrap());
    }
    // A tampered output is detected.
    let mut bad = m.clone();
    bad.outputs[0].sha256 = "0".repeat(64);
    fs::write(dir.path().join("bad.json"), serde_json::to_vec(&bad).unwrap()).unwrap();
    let third = dir.path().join("third");
    let msg = run_err(&["rerun", dir.path().join("bad.json").to_str().unwrap(), "--out", third.to_str().unwrap()]);
    assert!(msg.contains("simulate.csv"), "{msg}");
}

#[test]
fn alist_generate_and_inspect() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    run_ok(&["alist", "generate", "--out", out, "--n", "204", "--girth", "6", "--seed", "3"]);
    let text = run_ok(&["alist", "inspect", dir.path().join("graph.alist").to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["n"], 204);
    assert_eq!(v["m"], 102);
    assert_eq!(v["regular"], serde_json::json!([3, 6]));
    assert!(v["girth"].as_u64().unwrap() >= 6);
    let msg = run_err(&["alist", "generate", "--out", out, "--n", "10", "--dc", "4", "--seed", "1"]);
    assert!(msg.contains("divisible") || msg.contains("10"), "{msg}");
}

#[test]
fn small_sweeps_through_the_library_entry_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = [
        "noisyms", "threshold-sweep", "--out", out, "--mus", "1,2", "--eta", "1e-5", "--start", "0.02", "--stop",
        "0.06", "--step", "0.005", "--resolution", "1e-3",
    ];
    let text = noisyms::cli::run(args.iter().map(Into::into)).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("mu=")).count(), 2);
    let values = csv_column(&dir.path().join("thresholds.csv"), "value");
    let mu1: f64 = values[0].parse().unwrap();
    assert!((mu1 - 0.039).abs() <= 0.0015, "{mu1}");

    let args = ["noisyms", "pmf-dump", "--out", out, "--chi", "0.06", "--at", "0,1,3"];
    noisyms::cli::run(args.iter().map(Into::into)).unwrap();
    let its = csv_column(&dir.path().join("pmf_dump.csv"), "iteration");
    assert!(its.iter().any(|i| i == "3"));
    let help = noisyms::cli::run(["noisyms", "--help"].iter().map(Into::into)).unwrap();
    assert!(help.contains("threshold-sweep"));
}
