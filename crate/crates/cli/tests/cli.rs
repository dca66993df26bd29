mod common;

use std::path::PathBuf;
use std::process::{Command, Output};

use proptest::prelude::*;
use qledger_cli::script::{parse_script, render, ErrorKind};

fn qledger(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qledger"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn bundled(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn stern_gerlach_json_matches_golden_file() {
    let out = qledger(&["scenario", "stern-gerlach", "--format", "json", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let golden = include_str!("golden/stern_gerlach_seed1.json");
    assert_eq!(stdout(&out), golden);
}

#[test]
fn bundled_script_reproduces_the_measurement_trace() {
    let path = bundled("stern_gerlach.scn");
    let out = qledger(&["run", path.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "step,S_C,S_A,S_global,mutual_AC,residual");
    let value = |row: usize, col: usize| -> f64 { lines[row].split(',').nth(col).unwrap().parse().unwrap() };
    let labels: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(labels, ["init", "measure", "invert"]);
    for (row, (s, mi)) in [(0.0, 0.0), (1.0, 2.0), (0.0, 0.0)].into_iter().enumerate() {
        assert!((value(row + 1, 1) - s).abs() < 1e-9);
        assert!((value(row + 1, 4) - mi).abs() < 1e-9);
    }
}

#[test]
fn bundled_script_passes_in_table_form() {
    let path = bundled("stern_gerlach.scn");
    let out = qledger(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).ends_with("verdict: PASS\n"));
}

#[test]
fn output_is_deterministic_per_seed() {
    let path = bundled("decoherence.scn");
    let p = path.to_str().unwrap();
    for format in ["table", "csv", "json"] {
        let a = qledger(&["run", p, "--seed", "5", "--format", format]);
        let b = qledger(&["run", p, "--seed", "5", "--format", format]);
        assert_eq!(a.stdout, b.stdout);
    }
    let c = qledger(&["run", p, "--seed", "6", "--format", "csv"]);
    assert_ne!(qledger(&["run", p, "--seed", "5", "--format", "csv"]).stdout, c.stdout);
}

#[test]
fn failed_invariant_exits_with_one() {
    let path = bundled("decoherence.scn");
    let out = qledger(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL  global-purity"));
}

#[test]
fn parse_errors_exit_with_two_and_a_location() {
    let dir = std::env::temp_dir().join(format!("qledger-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("bad.scn");
    std::fs::write(&file, "[systems]\nq = 2\n[steps]\nflip = x ghost\n").unwrap();
    let out = qledger(&["run", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("4:10: semantic error [undeclared-system]"), "{err}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(qledger(&["scenario", "bogus"]).status.code(), Some(2));
    assert_eq!(qledger(&["verify", "--suite", "nothing"]).status.code(), Some(2));
    assert_eq!(qledger(&["run", "/nonexistent/file.scn"]).status.code(), Some(2));
    let guard = qledger(&["scenario", "stern-gerlach", "--lab-qubits", "20"]);
    assert_eq!(guard.status.code(), Some(2));
}

#[test]
fn verify_reports_counts_and_verdict() {
    let out = qledger(&["verify", "--suite", "balance", "--instances", "50", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("passed: 60/60"), "{text}");
    assert!(text.contains("random_unitary_map: 10"));
    assert!(text.ends_with("verdict: PASS\n"));
}

#[test]
fn energy_transfer_csv_has_one_row_per_step() {
    let out = qledger(&["scenario", "energy-transfer", "--field-qubits", "6", "--detectors", "3", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("step,S_detectors,S_lab,S_global,mutual_AC,S_det0"));
}

#[test]
fn empty_steps_emit_a_single_row() {
    let script = parse_script("[systems]\nq = 2\n[steps]\n").unwrap();
    let run = qledger_cli::run(&script, 0).unwrap();
    assert_eq!(run.table().rows.len(), 1);
}

#[test]
fn undeclared_system_names_the_identifier() {
    let e = parse_script("[systems]\nspin = 2\n[steps]\nm = cx spin -> notepad\n").unwrap_err();
    assert_eq!(e.kind, ErrorKind::Semantic);
    assert_eq!(e.code, "undeclared-system");
    assert!(e.message.contains("notepad"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn parse_inverts_render(script in common::scripts()) {
        let text = render(&script);
        let back = parse_script(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&back, &script);
        prop_assert_eq!(render(&back), text);
    }
}
