//! Randomized suites for the entropy identities and inequalities.
//!
//! Instance `i` of a suite run with seed `s` draws everything from
//! `derive_seed(s, i)`, so a report does not depend on evaluation order.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::channels::{apply_channel, apply_random_unitary_map, apply_unitary, KrausChannel, Povm, RandomUnitaryMap};
use crate::entropy::{joint_entropy_margin, relative_entropy, von_neumann_entropy, JointDistribution};
use crate::ledger::{entropy_ledger, verify_erasure_bound, Evolution};
use crate::linalg::{self, CMatrix};
use crate::states::{
    derive_seed, embed_unitary, partial_trace, random_density_with, random_pure_state, seeded_rng, tensor,
    DensityMatrix, HaarUnitary, Partition, PureState,
};
use crate::tol::{TOL_BALANCE, TOL_ENT};
use crate::{Error, Result};

/// Slack allowed in `S(N[rho]||N[sigma]) <= S(rho||sigma)`.
pub const TOL_DATA_PROCESSING: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    Balance,
    ErasureBound,
    Concavity,
    Subadditivity,
    DataProcessing,
    ClassicalContrast,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Balance,
        Suite::ErasureBound,
        Suite::Concavity,
        Suite::Subadditivity,
        Suite::DataProcessing,
        Suite::ClassicalContrast,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Balance => "balance",
            Suite::ErasureBound => "erasure-bound",
            Suite::Concavity => "concavity",
            Suite::Subadditivity => "subadditivity",
            Suite::DataProcessing => "data-processing",
            Suite::ClassicalContrast => "classical-contrast",
        }
    }

    /// What `SuiteReport::worst` measures.
    pub fn metric(self) -> &'static str {
        match self {
            Suite::Balance => "max |residual|",
            Suite::ErasureBound => "min S(A:C) - I(A:C)",
            Suite::Concavity => "min S(mixture) - mean S(branch)",
            Suite::Subadditivity => "min S(1') + S(2') - S(1) - S(2)",
            Suite::DataProcessing => "min S(rho||sigma) - S(N rho||N sigma)",
            Suite::ClassicalContrast => "min H(joint) - max H(marginal)",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| format!("unknown suite `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub instances: usize,
    pub passed: usize,
    /// Extreme value of [`Suite::metric`] over all instances.
    pub worst: f64,
    /// Index of the first failing instance.
    pub first_failure: Option<usize>,
    /// Suite-specific figures, e.g. instance counts per kind or a witness.
    pub notes: Vec<(String, f64)>,
    /// Fixed checks that accompany the random instances.
    pub witness_ok: bool,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.passed == self.instances && self.witness_ok
    }

    pub fn note(&self, name: &str) -> Option<f64> {
        self.notes.iter().find(|(k, _)| k == name).map(|&(_, v)| v)
    }
}

struct Tally {
    instances: usize,
    passed: usize,
    worst: f64,
    first_failure: Option<usize>,
    maximize: bool,
}

impl Tally {
    fn new(maximize: bool) -> Self {
        Self {
            instances: 0,
            passed: 0,
            worst: if maximize { 0.0 } else { f64::INFINITY },
            first_failure: None,
            maximize,
        }
    }

    fn record(&mut self, index: usize, value: f64, ok: bool) {
        self.instances += 1;
        if ok {
            self.passed += 1;
        } else if self.first_failure.is_none() {
            self.first_failure = Some(index);
        }
        self.worst = if self.maximize {
            self.worst.max(value)
        } else {
            self.worst.min(value)
        };
        if value.is_nan() {
            self.worst = f64::NAN;
        }
    }

    fn report(self, suite: Suite, notes: Vec<(String, f64)>, witness_ok: bool) -> SuiteReport {
        SuiteReport {
            suite,
            instances: self.instances,
            passed: self.passed,
            worst: self.worst,
            first_failure: self.first_failure,
            notes,
            witness_ok,
        }
    }
}

/// Runs `instances` random instances of `suite`.
pub fn run_suite(suite: Suite, instances: usize, seed: u64) -> Result<SuiteReport> {
    match suite {
        Suite::Balance => balance_suite(instances, seed),
        Suite::ErasureBound => erasure_bound_suite(instances, seed),
        Suite::Concavity => concavity_suite(instances, seed),
        Suite::Subadditivity => subadditivity_suite(instances, seed),
        Suite::DataProcessing => data_processing_suite(instances, seed),
        Suite::ClassicalContrast => classical_contrast_suite(instances, seed),
    }
}

fn instance_rng(seed: u64, index: usize) -> ChaCha8Rng {
    seeded_rng(derive_seed(seed, index as u64))
}

fn random_weights(k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

fn haar(dim: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    HaarUnitary::sample(dim, rng).to_matrix()
}

fn random_map(dim: usize, branches: usize, rng: &mut ChaCha8Rng) -> Result<RandomUnitaryMap> {
    let weights = random_weights(branches, rng);
    RandomUnitaryMap::new(weights.into_iter().map(|p| (p, haar(dim, rng))).collect())
}

fn random_state(dim: usize, rng: &mut ChaCha8Rng) -> Result<DensityMatrix> {
    let rank = rng.random_range(1..=dim);
    random_density_with(vec![dim], rank, rng)
}

/// Entropy-balance residuals for random pure `ACR` states.
///
/// `instances` unitary steps alternate between a global `ACR` unitary and
/// one acting on `AC` alone; a further `instances / 5` steps apply a random
/// unitary map to `AC` through its dilation.
pub fn balance_suite(instances: usize, seed: u64) -> Result<SuiteReport> {
    let mut tally = Tally::new(true);
    let partition = Partition::contiguous(1, 1, 3)?;
    let (mut global, mut local) = (0.0, 0.0);
    for i in 0..instances {
        let mut rng = instance_rng(seed, i);
        let dims: Vec<usize> = (0..3).map(|_| rng.random_range(2..=4)).collect();
        let psi = random_pure_state(dims.clone(), &mut rng)?;
        let u = if i % 2 == 0 {
            global += 1.0;
            haar(psi.dim(), &mut rng)
        } else {
            local += 1.0;
            embed_unitary(&haar(dims[0] * dims[1], &mut rng), &[0, 1], &dims)?
        };
        let record = entropy_ledger(&psi, &Evolution::Unitary(u), &partition)?;
        tally.record(i, record.residual.abs(), record.residual.abs() < TOL_BALANCE);
    }
    let maps = instances / 5;
    for j in 0..maps {
        let i = instances + j;
        let mut rng = instance_rng(seed, i);
        let dims: Vec<usize> = (0..3).map(|_| rng.random_range(2..=3)).collect();
        let psi = random_pure_state(dims.clone(), &mut rng)?;
        let branches = rng.random_range(2..=4);
        let ac = random_map(dims[0] * dims[1], branches, &mut rng)?;
        let embedded = ac
            .branches()
            .iter()
            .map(|(p, u)| Ok((*p, embed_unitary(u, &[0, 1], &dims)?)))
            .collect::<Result<Vec<_>>>()?;
        let map = RandomUnitaryMap::new(embedded)?;
        let record = entropy_ledger(&psi, &Evolution::RandomUnitary(map), &partition)?;
        tally.record(i, record.residual.abs(), record.residual.abs() < TOL_BALANCE);
    }
    let notes = vec![
        ("global_unitary".to_string(), global),
        ("ac_unitary".to_string(), local),
        ("random_unitary_map".to_string(), maps as f64),
    ];
    Ok(tally.report(Suite::Balance, notes, true))
}

/// `S(A:C) >= I(A:C)` for random states on `2 (x) 2` and `2 (x) 3` under
/// random local POVMs. The fixed witness is the correlated spin-record
/// state `(|00> + |11>)/sqrt(2)` read out in the computational basis, with
/// slack exactly one bit.
pub fn erasure_bound_suite(instances: usize, seed: u64) -> Result<SuiteReport> {
    let mut tally = Tally::new(false);
    let partition = Partition::contiguous(1, 1, 2)?;
    for i in 0..instances {
        let mut rng = instance_rng(seed, i);
        let dims = if i % 2 == 0 { vec![2, 2] } else { vec![2, 3] };
        let dim = dims[0] * dims[1];
        let rank = rng.random_range(1..=dim);
        let rho = random_density_with(dims.clone(), rank, &mut rng)?;
        let outcomes_a = rng.random_range(2..=4);
        let outcomes_c = rng.random_range(2..=4);
        let povm_a = Povm::random(dims[0], outcomes_a, &mut rng)?;
        let povm_c = Povm::random(dims[1], outcomes_c, &mut rng)?;
        let record = verify_erasure_bound(&rho, &partition, &povm_a, &povm_c)?;
        tally.record(i, record.slack, record.holds());
    }
    let witness = erasure_witness()?;
    let witness_ok = (witness.slack - 1.0).abs() <= TOL_ENT;
    let notes = vec![
        ("witness_quantum_mi".to_string(), witness.quantum_mi),
        ("witness_classical_mi".to_string(), witness.classical_mi),
        ("witness_slack".to_string(), witness.slack),
    ];
    Ok(tally.report(Suite::ErasureBound, notes, witness_ok))
}

/// The spin after one CNOT onto a record qubit, measured in the
/// computational basis on both sides.
pub fn erasure_witness() -> Result<crate::ledger::BoundRecord> {
    let psi = bell_state()?;
    let partition = Partition::contiguous(1, 1, 2)?;
    verify_erasure_bound(
        &psi.to_density(),
        &partition,
        &Povm::computational(2),
        &Povm::computational(2),
    )
}

fn bell_state() -> Result<PureState> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut amplitudes = linalg::CVector::zeros(4);
    amplitudes[0] = linalg::ONE * h;
    amplitudes[3] = linalg::ONE * h;
    PureState::new(vec![2, 2], amplitudes)
}

/// `S(sum_n p_n U_n rho U_n^dag) >= sum_n p_n S(U_n rho U_n^dag)`.
pub fn concavity_suite(instances: usize, seed: u64) -> Result<SuiteReport> {
    let mut tally = Tally::new(false);
    for i in 0..instances {
        let mut rng = instance_rng(seed, i);
        let dim = rng.random_range(2..=4);
        let rho = random_state(dim, &mut rng)?;
        let branches = rng.random_range(2..=4);
        let map = random_map(dim, branches, &mut rng)?;
        let mixed = von_neumann_entropy(&apply_random_unitary_map(&map, &rho)?);
        let mut average = 0.0;
        for (p, u) in map.branches() {
            average += p * von_neumann_entropy(&apply_unitary(u, &rho)?);
        }
        let margin = mixed - average;
        tally.record(i, margin, margin >= -TOL_ENT);
    }
    Ok(tally.report(Suite::Concavity, Vec::new(), true))
}

/// `S(rho_1') + S(rho_2') >= S(rho_1) + S(rho_2)` for
/// `rho' = U (rho_1 (x) rho_2) U^dag`.
pub fn subadditivity_suite(instances: usize, seed: u64) -> Result<SuiteReport> {
    let mut tally = Tally::new(false);
    for i in 0..instances {
        let mut rng = instance_rng(seed, i);
        let (d1, d2) = (rng.random_range(2..=3), rng.random_range(2..=3));
        let rho1 = random_state(d1, &mut rng)?;
        let rho2 = random_state(d2, &mut rng)?;
        let joint = tensor(&rho1, &rho2)?;
        let evolved = apply_unitary(&haar(d1 * d2, &mut rng), &joint)?;
        let after = von_neumann_entropy(&partial_trace(&evolved, &[0])?)
            + von_neumann_entropy(&partial_trace(&evolved, &[1])?);
        let before = von_neumann_entropy(&rho1) + von_neumann_entropy(&rho2);
        let margin = after - before;
        tally.record(i, margin, margin >= -TOL_ENT);
    }
    Ok(tally.report(Suite::Subadditivity, Vec::new(), true))
}

/// `S(N[rho]||N[sigma]) <= S(rho||sigma)` for random channels `N` with
/// full-rank `sigma`, so that every `S(rho||sigma)` is finite.
pub fn data_processing_suite(instances: usize, seed: u64) -> Result<SuiteReport> {
    let mut tally = Tally::new(false);
    for i in 0..instances {
        let mut rng = instance_rng(seed, i);
        let d_in: usize = rng.random_range(2..=4);
        let d_out = rng.random_range(2..=4);
        let min_kraus = d_in.div_ceil(d_out);
        let n_kraus = rng.random_range(min_kraus..=4);
        let rho = random_state(d_in, &mut rng)?;
        let sigma = random_density_with(vec![d_in], d_in, &mut rng)?;
        let channel = KrausChannel::random(d_in, d_out, n_kraus, &mut rng)?;
        let before = relative_entropy(&rho, &sigma)?;
        let after = relative_entropy(&apply_channel(&channel, &rho)?, &apply_channel(&channel, &sigma)?)?;
        if !before.is_finite() {
            return Err(Error::InvalidState(format!(
                "instance {i}: full-rank sigma gave infinite relative entropy"
            )));
        }
        let margin = before - after;
        tally.record(i, margin, margin >= -TOL_DATA_PROCESSING);
    }
    Ok(tally.report(Suite::DataProcessing, Vec::new(), true))
}

/// `H(joint) >= max(H(q), H(r))` for random classical tables, with a Bell
/// pair as the quantum witness where the joint entropy is below a marginal.
pub fn classical_contrast_suite(instances: usize, seed: u64) -> Result<SuiteReport> {
    let mut tally = Tally::new(false);
    for i in 0..instances {
        let mut rng = instance_rng(seed, i);
        let rows = rng.random_range(1..=5);
        let cols = rng.random_range(1..=5);
        let cells: Vec<f64> = (0..rows * cols)
            .map(|_| {
                if rng.random_bool(0.25) {
                    0.0
                } else {
                    rng.sample::<f64, _>(Exp1)
                }
            })
            .collect();
        let total: f64 = cells.iter().sum();
        let cells = if total > 0.0 {
            cells.iter().map(|c| c / total).collect()
        } else {
            let mut point = vec![0.0; rows * cols];
            point[0] = 1.0;
            point
        };
        let joint = JointDistribution::new(rows, cols, cells)?;
        let margin = joint_entropy_margin(&joint);
        tally.record(i, margin, margin >= -TOL_ENT);
    }
    let bell = bell_state()?.to_density();
    let s_joint = von_neumann_entropy(&bell);
    let s_sub = von_neumann_entropy(&partial_trace(&bell, &[0])?);
    let witness_ok = s_joint.abs() <= TOL_ENT && (s_sub - 1.0).abs() <= TOL_ENT;
    let notes = vec![
        ("witness_joint_entropy".to_string(), s_joint),
        ("witness_subsystem_entropy".to_string(), s_sub),
    ];
    Ok(tally.report(Suite::ClassicalContrast, notes, witness_ok))
}
