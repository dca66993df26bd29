//! The two erasure experiments as entropy timelines.
//!
//! Both evolve pure global states, so the global entropy stays at zero.
//!
//! * Stern-Gerlach: a spin in `|+>` is measured by CNOT fan-out onto lab
//!   qubits, then the fan-out is undone.
//! * Energy transfer: a qubit field in `|0...0>` is scrambled by a
//!   Haar-random unitary, read by small detectors, and recovered by the
//!   exact inverse.

use crate::entropy::{mutual_information, shannon_entropy, von_neumann_entropy, Bits};
use crate::linalg::{self, CVector};
use crate::states::{checked_dim, gates, seeded_rng, DensityMatrix, HaarUnitary, Partition, PureState};
use crate::tol::TOL_ENT;
use crate::{Error, Result};

/// One row of a scenario timeline.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub step_label: String,
    /// Entropy of the observed system (the spin, or the detectors' sum of
    /// individual entropies).
    pub s_system: Bits,
    /// Entropy of the lab as a whole.
    pub s_lab: Bits,
    pub s_global: Bits,
    pub mutual_ac: Bits,
    /// Named diagnostics, in a fixed order.
    pub extra: Vec<(String, f64)>,
}

impl TraceRow {
    pub fn extra(&self, name: &str) -> Option<f64> {
        self.extra.iter().find(|(k, _)| k == name).map(|&(_, v)| v)
    }
}

/// An invariant evaluated during a run.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    /// The quantity compared against the bound.
    pub value: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            passed: value <= bound,
        }
    }

    pub fn above(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            passed: value > bound,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioRun {
    pub name: &'static str,
    /// Column headings for `s_system` and `s_lab`.
    pub system_column: &'static str,
    pub lab_column: &'static str,
    pub rows: Vec<TraceRow>,
    pub checks: Vec<Check>,
}

impl ScenarioRun {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn global_entropy(psi: &PureState) -> Bits {
    let spectrum = psi.global_spectrum();
    let total: f64 = spectrum.iter().sum();
    shannon_entropy(&spectrum.iter().map(|v| v / total).collect::<Vec<_>>())
}

fn block_entropy(psi: &PureState, keep: &[usize]) -> Result<Bits> {
    let spectrum = psi.schmidt_spectrum(keep)?;
    let clamped: Vec<f64> = spectrum.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = clamped.iter().sum();
    Ok(shannon_entropy(&clamped.iter().map(|v| v / total).collect::<Vec<_>>()))
}

/// CNOT from qubit 0 onto every other qubit, applied as the basis
/// permutation it is.
fn fanout(psi: &PureState) -> Result<PureState> {
    let n = psi.dims().len();
    let dim = psi.dim();
    let control = 1usize << (n - 1);
    let targets = control - 1;
    let old = psi.amplitudes();
    let mut out = CVector::zeros(dim);
    for i in 0..dim {
        let j = if i & control != 0 { i ^ targets } else { i };
        out[j] = old[i];
    }
    psi.with_amplitudes(out)
}

const SG_LABELS: [&str; 3] = ["init", "measure", "invert"];

/// Stern-Gerlach measurement of a spin in `|+>` by `lab_qubits` record
/// qubits, followed by the coherent inversion of that measurement.
///
/// The experiment is deterministic; `seed` is accepted so that every
/// scenario has the same calling convention.
pub fn stern_gerlach_scenario(lab_qubits: usize, seed: u64) -> Result<ScenarioRun> {
    let _ = seed;
    if lab_qubits == 0 {
        return Err(Error::InvalidSubsystems("at least one lab qubit is required".into()));
    }
    let dims = vec![2; lab_qubits + 1];
    checked_dim(&dims)?;
    let plus = gates::plus_state();
    let mut factors = vec![plus.clone()];
    factors.extend((0..lab_qubits).map(|_| PureState::basis(vec![2], 0).expect("qubit")));
    let initial = PureState::product(&factors)?;
    let measured = fanout(&initial)?;
    let inverted = fanout(&measured)?;

    let lab: Vec<usize> = (1..=lab_qubits).collect();
    let plus_rho = plus.to_density();
    let half = DensityMatrix::maximally_mixed(vec![2])?;
    let mut rows = Vec::new();
    let mut spin_states = Vec::new();
    for (label, psi) in SG_LABELS.iter().zip([&initial, &measured, &inverted]) {
        let spin = psi.reduced(&[0])?;
        let s_spin = von_neumann_entropy(&spin);
        let s_lab = block_entropy(psi, &lab)?;
        let s_global = global_entropy(psi);
        let mut extra = vec![(
            "spin_deviation".to_string(),
            spin.max_abs_diff(&plus_rho)?,
        )];
        for &k in &lab {
            let pair = psi.reduced(&[0, k])?;
            let p = Partition::from_blocks(2, &[1], &[0], &[])?;
            extra.push((format!("mi_spin_lab{}", k - 1), mutual_information(&pair, &p)?));
        }
        rows.push(TraceRow {
            step_label: label.to_string(),
            s_system: s_spin,
            s_lab,
            s_global,
            mutual_ac: s_spin + s_lab - s_global,
            extra,
        });
        spin_states.push(spin);
    }

    let mut checks = Vec::new();
    for (row, (s, mi)) in rows.iter().zip([(0.0, 0.0), (1.0, 2.0), (0.0, 0.0)]) {
        let l = &row.step_label;
        checks.push(Check::at_most(format!("{l}: S_spin = {s}"), (row.s_system - s).abs(), TOL_ENT));
        checks.push(Check::at_most(format!("{l}: S(A:C) = {mi}"), (row.mutual_ac - mi).abs(), TOL_ENT));
        checks.push(Check::at_most(format!("{l}: global purity"), row.s_global, TOL_ENT));
    }
    checks.push(Check::at_most(
        "measure: spin maximally mixed",
        spin_states[1].max_abs_diff(&half)?,
        1e-12,
    ));
    checks.push(Check::at_most(
        "invert: spin returned to |+>",
        rows[2].extra("spin_deviation").unwrap_or(f64::INFINITY),
        1e-9,
    ));
    let residual_record = rows[2]
        .extra
        .iter()
        .filter(|(k, _)| k.starts_with("mi_spin_lab"))
        .map(|&(_, v)| v)
        .fold(0.0, f64::max);
    checks.push(Check::at_most("invert: every record decorrelated", residual_record, 1e-9));

    Ok(ScenarioRun {
        name: "stern-gerlach",
        system_column: "S_spin",
        lab_column: "S_lab",
        rows,
        checks,
    })
}

/// How the field is spread over the detectors.
#[derive(Clone, Copy, Debug)]
pub enum Scramble {
    /// Haar-random global unitary drawn from the seed.
    Haar { seed: u64 },
    Identity,
}

/// Energy transfer with a Haar-random scramble; see [`energy_transfer_with`].
pub fn energy_transfer_scenario(
    n_field_qubits: usize,
    detector_size: usize,
    n_detectors: usize,
    seed: u64,
) -> Result<ScenarioRun> {
    energy_transfer_with(n_field_qubits, detector_size, n_detectors, Scramble::Haar { seed })
}

/// A field of `n_field_qubits` qubits in `|0...0>` is scrambled and then
/// recovered by the inverse scramble. Detector `k` owns qubits
/// `k * detector_size .. (k + 1) * detector_size`; the remaining qubits are
/// field modes nobody looks at.
///
/// Columns: `S_detectors` is the sum of individual detector entropies,
/// `S_lab` the joint entropy of the detector bank, and `mutual_AC` their
/// difference. Extras hold each detector's entropy and trace distance to the
/// maximally mixed state.
pub fn energy_transfer_with(
    n_field_qubits: usize,
    detector_size: usize,
    n_detectors: usize,
    scramble: Scramble,
) -> Result<ScenarioRun> {
    if detector_size == 0 || n_detectors == 0 {
        return Err(Error::InvalidSubsystems("detectors must be non-empty".into()));
    }
    if n_detectors * detector_size > n_field_qubits {
        return Err(Error::InvalidSubsystems(format!(
            "{n_detectors} detectors of {detector_size} qubits exceed {n_field_qubits} field qubits"
        )));
    }
    let dims = vec![2; n_field_qubits];
    let dim = checked_dim(&dims)?;
    let initial = PureState::basis(dims, 0)?;
    let (scrambled, recovered) = match scramble {
        Scramble::Haar { seed } => {
            let u = HaarUnitary::sample(dim, &mut seeded_rng(seed));
            let scrambled = initial.with_amplitudes(u.apply(initial.amplitudes()))?;
            let recovered = scrambled.with_amplitudes(u.apply_adjoint(scrambled.amplitudes()))?;
            (scrambled, recovered)
        }
        Scramble::Identity => (initial.clone(), initial.clone()),
    };

    let detectors: Vec<Vec<usize>> = (0..n_detectors)
        .map(|k| (k * detector_size..(k + 1) * detector_size).collect())
        .collect();
    let bank: Vec<usize> = detectors.iter().flatten().copied().collect();
    let canonical = DensityMatrix::maximally_mixed(vec![2; detector_size])?;

    let mut rows = Vec::new();
    for (label, psi) in [("init", &initial), ("scramble", &scrambled), ("recover", &recovered)] {
        let mut entropies = Vec::with_capacity(n_detectors);
        let mut distances = Vec::with_capacity(n_detectors);
        for det in &detectors {
            let rho = psi.reduced(det)?;
            entropies.push(von_neumann_entropy(&rho));
            distances.push(linalg::trace_distance(rho.matrix(), canonical.matrix()));
        }
        let s_detectors: f64 = entropies.iter().sum();
        let s_bank = block_entropy(psi, &bank)?;
        let mut extra: Vec<(String, f64)> = entropies
            .iter()
            .enumerate()
            .map(|(k, &s)| (format!("S_det{k}"), s))
            .collect();
        extra.extend(distances.iter().enumerate().map(|(k, &d)| (format!("tdist_det{k}"), d)));
        rows.push(TraceRow {
            step_label: label.to_string(),
            s_system: s_detectors,
            s_lab: s_bank,
            s_global: global_entropy(psi),
            mutual_ac: s_detectors - s_bank,
            extra,
        });
    }

    let mut checks: Vec<Check> = rows
        .iter()
        .map(|r| Check::at_most(format!("{}: global purity", r.step_label), r.s_global, TOL_ENT))
        .collect();
    let recovery_gap = (0..n_detectors)
        .map(|k| {
            let key = format!("S_det{k}");
            (rows[2].extra(&key).unwrap_or(f64::NAN) - rows[0].extra(&key).unwrap_or(f64::NAN)).abs()
        })
        .fold(0.0, f64::max);
    checks.push(Check::at_most("recover: detector entropies restored", recovery_gap, 1e-9));
    if let Scramble::Haar { .. } = scramble {
        checks.push(Check::above(
            "scramble: apparent detector entropy positive",
            rows[1].s_system,
            0.0,
        ));
    }

    Ok(ScenarioRun {
        name: "energy-transfer",
        system_column: "S_detectors",
        lab_column: "S_lab",
        rows,
        checks,
    })
}
