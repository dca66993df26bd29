//! Acceptance criteria, one pass/fail line each. Runs without the libtest
//! harness so the lines are always printed.

mod common;

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::Rng;
use rand_distr::StandardNormal;

use qledger::scenarios::{energy_transfer_scenario, stern_gerlach_scenario};
use qledger::states::{derive_seed, seeded_rng};
use qledger::verify::{
    balance_suite, classical_contrast_suite, concavity_suite, data_processing_suite, erasure_bound_suite,
    subadditivity_suite,
};
use qledger_cli::script::{parse_script, render};

const SEED: u64 = 20_260_417;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn stern_gerlach_exact() -> Outcome {
    for lab in [1, 3] {
        let run = stern_gerlach_scenario(lab, SEED).map_err(err)?;
        for (row, (s, mi)) in run.rows.iter().zip([(0.0, 0.0), (1.0, 2.0), (0.0, 0.0)]) {
            ensure((row.s_system - s).abs() <= 1e-9, || format!("L={lab} {}: S(spin) = {}", row.step_label, row.s_system))?;
            ensure((row.mutual_ac - mi).abs() <= 1e-9, || format!("L={lab} {}: S(A:C) = {}", row.step_label, row.mutual_ac))?;
        }
        let dev = run.rows[2].extra("spin_deviation").ok_or("missing spin_deviation")?;
        ensure(dev <= 1e-9, || format!("L={lab}: final spin off |+><+| by {dev:e}"))?;
        ensure(run.passed(), || format!("L={lab}: scenario checks failed"))?;
    }
    Ok("S(spin) 0 -> 1 -> 0, S(A:C) 0 -> 2 -> 0, spin restored (L = 1, 3)".into())
}

fn balance() -> Outcome {
    let r = balance_suite(1000, SEED).map_err(err)?;
    ensure(r.note("random_unitary_map") == Some(200.0), || "expected 200 dilated map instances".into())?;
    ensure(r.instances == 1200 && r.passed == 1200, || format!("{}/{} balanced", r.passed, r.instances))?;
    ensure(r.worst < 1e-8, || format!("max |residual| {:e}", r.worst))?;
    Ok(format!("1200/1200 balanced, max |residual| {:.2e}", r.worst))
}

fn erasure_bound() -> Outcome {
    let r = erasure_bound_suite(500, SEED).map_err(err)?;
    ensure(r.passed == r.instances && r.instances == 500, || format!("{}/{} hold", r.passed, r.instances))?;
    ensure(r.worst >= -1e-9, || format!("min slack {:e}", r.worst))?;
    let slack = r.note("witness_slack").ok_or("missing witness")?;
    ensure((slack - 1.0).abs() <= 1e-9, || format!("witness slack {slack}"))?;
    Ok(format!("500/500 hold, min slack {:.3e}, witness slack {slack}", r.worst))
}

fn concavity_and_subadditivity() -> Outcome {
    let c = concavity_suite(500, SEED).map_err(err)?;
    let s = subadditivity_suite(500, SEED).map_err(err)?;
    for r in [&c, &s] {
        ensure(r.instances == 500 && r.passed == 500, || format!("{}: {}/{}", r.suite, r.passed, r.instances))?;
        ensure(r.worst >= -1e-9, || format!("{}: worst margin {:e}", r.suite, r.worst))?;
    }
    Ok(format!("500 + 500 hold, min margins {:.3e} / {:.3e}", c.worst, s.worst))
}

fn data_processing() -> Outcome {
    let r = data_processing_suite(300, SEED).map_err(err)?;
    ensure(r.instances == 300 && r.passed == 300, || format!("{}/{} monotone", r.passed, r.instances))?;
    ensure(r.worst >= -1e-8, || format!("worst margin {:e}", r.worst))?;
    Ok(format!("300/300 monotone, min margin {:.3e}", r.worst))
}

fn binary_entropy(p: f64) -> f64 {
    [p, 1.0 - p].iter().filter(|&&x| x > 0.0).map(|x| -x * x.log2()).sum()
}

/// Single-qubit entropies of a normalized complex-Gaussian vector on
/// `n` qubits, from the 2x2 reduced blocks written out by hand.
fn oracle_qubit_entropies(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let dim = 1usize << n;
    let amps: Vec<(f64, f64)> = (0..dim)
        .map(|_| (rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm: f64 = amps.iter().map(|(a, b)| a * a + b * b).sum();
    (0..n)
        .map(|k| {
            let bit = 1usize << (n - 1 - k);
            let (mut p0, mut re, mut im) = (0.0, 0.0, 0.0);
            for i in (0..dim).filter(|i| i & bit == 0) {
                let (a, b) = amps[i];
                let (c, d) = amps[i | bit];
                p0 += a * a + b * b;
                re += a * c + b * d;
                im += b * c - a * d;
            }
            let (p0, re, im) = (p0 / norm, re / norm, im / norm);
            let r = ((p0 - 0.5).powi(2) + re * re + im * im).sqrt();
            binary_entropy(0.5 + r)
        })
        .collect()
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

fn energy_transfer() -> Outcome {
    let (n, detectors) = (8, 4);
    let mut rng = seeded_rng(derive_seed(SEED, 1));
    let oracle: Vec<Vec<f64>> = (0..2000).map(|_| oracle_qubit_entropies(n, &mut rng)).collect();
    let oracle_flat: Vec<f64> = oracle.iter().flat_map(|e| e[..detectors].to_vec()).collect();
    let oracle_rate = oracle.iter().filter(|e| e[..detectors].iter().all(|&s| s >= 0.9)).count() as f64 / oracle.len() as f64;
    ensure(oracle_rate >= 0.95, || format!("oracle predicts only {oracle_rate} of runs above 0.9 bits"))?;

    let mut good_runs = 0;
    let mut observed = Vec::new();
    for seed in 0..100u64 {
        let run = energy_transfer_scenario(n, 1, detectors, derive_seed(SEED, 100 + seed)).map_err(err)?;
        for row in &run.rows {
            ensure(row.s_global <= 1e-9, || format!("seed {seed} {}: S_global {:e}", row.step_label, row.s_global))?;
        }
        let entropies: Vec<f64> = (0..detectors).map(|k| run.rows[1].extra(&format!("S_det{k}")).unwrap()).collect();
        for k in 0..detectors {
            let key = format!("S_det{k}");
            let gap = (run.rows[2].extra(&key).unwrap() - run.rows[0].extra(&key).unwrap()).abs();
            ensure(gap <= 1e-9, || format!("seed {seed}: detector {k} recovered to within {gap:e}"))?;
        }
        if entropies.iter().all(|&s| s >= 0.9) {
            good_runs += 1;
        }
        observed.extend(entropies);
    }
    ensure(good_runs >= 95, || format!("{good_runs}/100 runs with every detector >= 0.9 bits"))?;
    let (mo, so) = mean_se(&observed);
    let (mr, sr) = mean_se(&oracle_flat);
    let z = (mo - mr).abs() / (so * so + sr * sr).sqrt();
    ensure(z <= 3.0, || format!("mean detector entropy {mo:.6} vs oracle {mr:.6} ({z:.2} standard errors)"))?;
    Ok(format!(
        "{good_runs}/100 runs >= 0.9 bits (oracle rate {oracle_rate:.3}), mean {mo:.5} vs oracle {mr:.5} ({z:.2} SE)"
    ))
}

fn classical_contrast() -> Outcome {
    let r = classical_contrast_suite(1000, SEED).map_err(err)?;
    ensure(r.instances == 1000 && r.passed == 1000, || format!("{} violations", r.instances - r.passed))?;
    let joint = r.note("witness_joint_entropy").ok_or("missing witness")?;
    let sub = r.note("witness_subsystem_entropy").ok_or("missing witness")?;
    ensure(joint.abs() <= 1e-9 && (sub - 1.0).abs() <= 1e-9, || format!("Bell witness S(joint) {joint}, S(sub) {sub}"))?;
    Ok(format!("0 violations in 1000 tables; Bell pair S(joint) = {:.1}, S(sub) = {sub:.1}", joint.abs()))
}

fn cli_contract() -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_qledger"))
        .args(["scenario", "stern-gerlach", "--format", "json", "--seed", "1"])
        .output()
        .map_err(err)?;
    ensure(out.status.success(), || format!("exit status {:?}", out.status.code()))?;
    let golden = include_bytes!("golden/stern_gerlach_seed1.json");
    ensure(out.stdout == golden, || "output differs from the golden file".into())?;

    let mut runner = TestRunner::new(Config {
        cases: 200,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&common::scripts(), |script| {
            let text = render(&script);
            let back = parse_script(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
            if back != script {
                return Err(TestCaseError::fail(format!("round trip changed the script:\n{text}")));
            }
            Ok(())
        })
        .map_err(err)?;
    Ok("golden JSON byte-equal; 200/200 scripts round-trip".into())
}

struct Criterion {
    name: &'static str,
    limit: Duration,
    check: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { name: "stern-gerlach exact values", limit: Duration::from_secs(1), check: stern_gerlach_exact },
        Criterion { name: "entropy balance suite", limit: Duration::from_secs(30), check: balance },
        Criterion { name: "erasure bound suite", limit: Duration::from_secs(30), check: erasure_bound },
        Criterion { name: "concavity and subadditivity", limit: Duration::from_secs(30), check: concavity_and_subadditivity },
        Criterion { name: "data-processing monotonicity", limit: Duration::from_secs(30), check: data_processing },
        Criterion { name: "energy-transfer typicality", limit: Duration::from_secs(60), check: energy_transfer },
        Criterion { name: "quantum-classical contrast", limit: Duration::from_secs(5), check: classical_contrast },
        Criterion { name: "cli contract", limit: Duration::from_secs(30), check: cli_contract },
    ];
    let mut failures = 0;
    for (k, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = (c.check)();
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if elapsed <= c.limit {
                Ok(detail)
            } else {
                Err(format!("took {elapsed:.2?}, limit {:?}", c.limit))
            }
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {}  [{elapsed:.2?}]  {detail}", k + 1, c.name),
            Err(why) => {
                failures += 1;
                println!("criterion {}: FAIL  {}  [{elapsed:.2?}]  {why}", k + 1, c.name);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
