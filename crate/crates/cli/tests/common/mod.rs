//! Random valid scripts, built from a stream of proptest-drawn choices.

use num_complex::Complex64;
use proptest::prelude::*;
use qledger_cli::script::{
    Column, ControlledGate, Expectation, Gate, InitSpec, MeasureBasis, Operation, PartitionSpec, Reports,
    Requirement, ScenarioScript, Step, SystemDecl,
};

const NAMES: [&str; 8] = ["spin", "lab", "env", "q0", "q_1", "Aux", "brain", "gauge"];
const LABELS: [&str; 8] = ["measure", "undo", "s2", "kick", "mix_it", "Haar", "t_", "step7"];
const GATES: [Gate; 7] = [Gate::I, Gate::X, Gate::Y, Gate::Z, Gate::H, Gate::S, Gate::T];

struct Choices {
    ints: Vec<u32>,
    floats: Vec<f64>,
    i: usize,
    f: usize,
}

impl Choices {
    fn pick(&mut self, n: usize) -> usize {
        let v = self.ints[self.i % self.ints.len()] as usize;
        self.i += 1;
        v % n.max(1)
    }

    fn coin(&mut self) -> bool {
        self.pick(2) == 0
    }

    fn float(&mut self) -> f64 {
        let v = self.floats[self.f % self.floats.len()];
        self.f += 1;
        v
    }

    fn subset<T: Clone>(&mut self, items: &[T]) -> Vec<T> {
        let mut pool = items.to_vec();
        let mut out = Vec::new();
        let n = self.pick(pool.len() + 1);
        for _ in 0..n {
            let k = self.pick(pool.len());
            out.push(pool.remove(k));
        }
        out
    }
}

fn build(mut ch: Choices) -> ScenarioScript {
    let n_sys = 1 + ch.pick(4);
    let mut names: Vec<&str> = NAMES.to_vec();
    let mut systems = Vec::new();
    for _ in 0..n_sys {
        let name = names.remove(ch.pick(names.len()));
        let dim = [1, 2, 2, 2, 3, 4][ch.pick(6)];
        systems.push(SystemDecl { name: name.to_string(), dim });
    }

    let mut init = Vec::new();
    for s in &systems {
        if ch.coin() {
            continue;
        }
        let spec = match ch.pick(6) {
            0 => InitSpec::Basis(ch.pick(s.dim)),
            1 if s.dim == 2 => InitSpec::Plus,
            2 if s.dim == 2 => InitSpec::Minus,
            3 => InitSpec::Random,
            4 => {
                let mut amps: Vec<Complex64> = (0..s.dim)
                    .map(|_| {
                        let re = if ch.coin() { ch.float() } else { 0.0 };
                        let im = if ch.coin() { ch.float() } else { 0.0 };
                        Complex64::new(re, im)
                    })
                    .collect();
                if amps.iter().all(|a| a.norm_sqr() == 0.0) {
                    amps[0] = Complex64::new(1.0, 0.0);
                }
                InitSpec::Amplitudes(amps)
            }
            _ => InitSpec::Uniform,
        };
        init.push((s.name.clone(), spec));
    }

    let qubits: Vec<&SystemDecl> = systems.iter().filter(|s| s.dim == 2).collect();
    let mut steps: Vec<Step> = Vec::new();
    let mut labels: Vec<&str> = LABELS.to_vec();
    for _ in 0..ch.pick(7) {
        let label = labels.remove(ch.pick(labels.len())).to_string();
        let s = &systems[ch.pick(systems.len())];
        let unitary_steps: Vec<String> = steps.iter().filter(|st| st.op.is_unitary()).map(|st| st.label.clone()).collect();
        let op = match ch.pick(6) {
            0 if qubits.len() >= 2 => {
                let control = qubits[ch.pick(qubits.len())].name.clone();
                let others: Vec<String> = qubits.iter().map(|q| q.name.clone()).filter(|q| *q != control).collect();
                let mut targets = ch.subset(&others);
                if targets.is_empty() {
                    targets.push(others[0].clone());
                }
                let gate = if ch.coin() { ControlledGate::X } else { ControlledGate::Z };
                Operation::Controlled { gate, control, targets }
            }
            1 => {
                let all: Vec<String> = systems.iter().map(|s| s.name.clone()).collect();
                let mut chosen = ch.subset(&all);
                if chosen.is_empty() {
                    chosen.push(s.name.clone());
                }
                Operation::Haar { systems: chosen }
            }
            2 => {
                let fitting: Vec<Gate> = GATES.into_iter().filter(|g| g.fits(s.dim)).collect();
                let k = 1 + ch.pick(3);
                let raw: Vec<f64> = (0..k).map(|_| ch.float().abs() % 1.0 + 0.01).collect();
                let total: f64 = raw.iter().sum();
                let branches = raw.iter().map(|w| (w / total, fitting[ch.pick(fitting.len())])).collect();
                Operation::Mix {
                    system: s.name.clone(),
                    branches,
                }
            }
            3 => Operation::Measure {
                system: s.name.clone(),
                basis: if s.dim == 2 && ch.coin() { MeasureBasis::X } else { MeasureBasis::Z },
            },
            4 if !unitary_steps.is_empty() => Operation::Invert {
                step: unitary_steps[ch.pick(unitary_steps.len())].clone(),
            },
            _ => {
                let fitting: Vec<Gate> = GATES.into_iter().filter(|g| g.fits(s.dim)).collect();
                Operation::Gate {
                    gate: fitting[ch.pick(fitting.len())],
                    target: s.name.clone(),
                }
            }
        };
        steps.push(Step { label, op });
    }

    let partition = if systems.len() >= 2 && ch.coin() {
        let mut p = PartitionSpec {
            a: vec![systems[0].name.clone()],
            c: vec![systems[1].name.clone()],
            r: Vec::new(),
        };
        for s in &systems[2..] {
            match ch.pick(3) {
                0 => p.a.push(s.name.clone()),
                1 => p.c.push(s.name.clone()),
                _ => p.r.push(s.name.clone()),
            }
        }
        Some(p)
    } else {
        None
    };

    let available: Vec<Column> = if partition.is_some() {
        Column::ALL.to_vec()
    } else {
        vec![Column::SGlobal]
    };
    let mut reports = Reports::default();
    if ch.coin() {
        reports.columns = Some(ch.subset(&available));
    }
    let requirements = if partition.is_some() {
        vec![Requirement::GlobalPurity, Requirement::Balance]
    } else {
        vec![Requirement::GlobalPurity]
    };
    reports.require = ch.subset(&requirements);
    if ch.coin() {
        reports.tolerance = Some(ch.float().abs() * 1e-7);
    }
    let mut rows: Vec<String> = vec!["init".to_string()];
    rows.extend(steps.iter().map(|s| s.label.clone()));
    for _ in 0..ch.pick(4) {
        let step = rows[ch.pick(rows.len())].clone();
        let column = available[ch.pick(available.len())];
        if reports.expectations.iter().any(|e| e.step == step && e.column == column) {
            continue;
        }
        reports.expectations.push(Expectation {
            step,
            column,
            value: ch.float(),
        });
    }

    ScenarioScript {
        systems,
        init,
        steps,
        partition,
        reports,
    }
}

fn float() -> impl Strategy<Value = f64> {
    prop_oneof![
        -2.0f64..2.0,
        (1u32..1000).prop_map(|k| k as f64 / 8.0),
        (-300i32..300).prop_map(|e| 10f64.powi(e)),
        Just(0.1),
        Just(-0.0),
    ]
}

pub fn scripts() -> impl Strategy<Value = ScenarioScript> {
    (
        prop::collection::vec(any::<u32>(), 128),
        prop::collection::vec(float(), 32),
    )
        .prop_map(|(ints, floats)| build(Choices { ints, floats, i: 0, f: 0 }))
}
