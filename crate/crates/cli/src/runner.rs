//! Executes a parsed script on a global density matrix.

use num_complex::Complex64;
use qledger::channels::{apply_random_unitary_map, apply_unitary, measure_and_reprepare, Povm, RandomUnitaryMap};
use qledger::entropy::von_neumann_entropy;
use qledger::ledger::{BlockEntropies, LedgerRecord};
use qledger::linalg::{self, CMatrix, CVector};
use qledger::scenarios::Check;
use qledger::states::{
    derive_seed, embed_operator, embed_unitary, gates, partial_trace, random_pure_state, seeded_rng, DensityMatrix,
    HaarUnitary, PureState,
};

use crate::output::Table;
use crate::script::{
    Column, ControlledGate, Gate, InitSpec, MeasureBasis, Operation, Requirement, ScenarioScript, INIT_LABEL,
};

/// Largest register a script may declare; every step is a dense
/// `D x D` operator.
pub const SCRIPT_DIM_MAX: usize = 1024;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("register dimension {dim} exceeds the script limit {max}")]
    TooLarge { dim: usize, max: usize },
    #[error(transparent)]
    Core(#[from] qledger::Error),
}

/// Entropies of one row, all columns filled.
#[derive(Clone, Debug, PartialEq)]
pub struct RowValues {
    pub label: String,
    pub blocks: Option<BlockEntropies>,
    pub s_global: f64,
    pub residual: f64,
}

impl RowValues {
    pub fn get(&self, column: Column) -> f64 {
        let b = self.blocks;
        match column {
            Column::SGlobal => self.s_global,
            Column::Residual => self.residual,
            _ => {
                let Some(b) = b else { return f64::NAN };
                match column {
                    Column::SA => b.s_a,
                    Column::SC => b.s_c,
                    Column::SR => b.s_r,
                    Column::SAC => b.s_ac,
                    _ => b.mutual(),
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScriptRun {
    pub columns: Vec<Column>,
    pub rows: Vec<RowValues>,
    pub checks: Vec<Check>,
}

impl ScriptRun {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn table(&self) -> Table {
        Table {
            columns: self.columns.iter().map(|c| c.name().to_string()).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| (r.label.clone(), self.columns.iter().map(|&c| r.get(c)).collect()))
                .collect(),
        }
    }
}

struct Blocks {
    a: Vec<usize>,
    c: Vec<usize>,
    r: Vec<usize>,
    ac: Vec<usize>,
}

fn indices(script: &ScenarioScript, names: &[String]) -> Vec<usize> {
    let mut out: Vec<usize> = names
        .iter()
        .map(|n| script.system_index(n).expect("validated by the parser"))
        .collect();
    out.sort_unstable();
    out
}

fn entropy_of(rho: &DensityMatrix, keep: &[usize]) -> qledger::Result<f64> {
    if keep.is_empty() {
        Ok(0.0)
    } else if keep.len() == rho.dims().len() {
        Ok(von_neumann_entropy(rho))
    } else {
        Ok(von_neumann_entropy(&partial_trace(rho, keep)?))
    }
}

fn row(label: &str, rho: &DensityMatrix, blocks: Option<&Blocks>, previous: Option<&RowValues>) -> qledger::Result<RowValues> {
    let block_entropies = match blocks {
        Some(b) => Some(BlockEntropies {
            s_a: entropy_of(rho, &b.a)?,
            s_c: entropy_of(rho, &b.c)?,
            s_r: entropy_of(rho, &b.r)?,
            s_ac: entropy_of(rho, &b.ac)?,
        }),
        None => None,
    };
    let residual = match (previous.and_then(|p| p.blocks), block_entropies) {
        (Some(before), Some(after)) => LedgerRecord::between(label, before, after).residual,
        (None, Some(_)) => 0.0,
        _ => f64::NAN,
    };
    Ok(RowValues {
        label: label.to_string(),
        blocks: block_entropies,
        s_global: von_neumann_entropy(rho),
        residual,
    })
}

fn gate_matrix(gate: Gate, dim: usize) -> CMatrix {
    match gate {
        Gate::I => linalg::identity(dim),
        Gate::X => gates::pauli_x(),
        Gate::Y => gates::pauli_y(),
        Gate::Z => gates::pauli_z(),
        Gate::H => gates::hadamard(),
        Gate::S => gates::phase_s(),
        Gate::T => gates::phase_t(),
    }
}

fn initial_vector(spec: Option<&InitSpec>, dim: usize, seed: u64) -> qledger::Result<PureState> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let amplitudes = match spec {
        None => return PureState::basis(vec![dim], 0),
        Some(InitSpec::Basis(k)) => return PureState::basis(vec![dim], *k),
        Some(InitSpec::Random) => return random_pure_state(vec![dim], &mut seeded_rng(seed)),
        Some(InitSpec::Plus) => CVector::from_vec(vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)]),
        Some(InitSpec::Minus) => CVector::from_vec(vec![Complex64::new(h, 0.0), Complex64::new(-h, 0.0)]),
        Some(InitSpec::Uniform) => CVector::from_element(dim, Complex64::new(1.0, 0.0)),
        Some(InitSpec::Amplitudes(a)) => CVector::from_vec(a.clone()),
    };
    PureState::normalized(vec![dim], amplitudes)
}

fn basis_vectors(basis: MeasureBasis, dim: usize) -> Vec<CVector> {
    match basis {
        MeasureBasis::Z => (0..dim)
            .map(|k| {
                let mut v = CVector::zeros(dim);
                v[k] = linalg::ONE;
                v
            })
            .collect(),
        MeasureBasis::X => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            vec![
                CVector::from_vec(vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)]),
                CVector::from_vec(vec![Complex64::new(h, 0.0), Complex64::new(-h, 0.0)]),
            ]
        }
    }
}

/// Runs `script`; random initial states and Haar steps draw from `seed`.
pub fn run(script: &ScenarioScript, seed: u64) -> Result<ScriptRun, RunError> {
    let dims = script.dims();
    let dim: usize = dims.iter().product();
    if dim > SCRIPT_DIM_MAX {
        return Err(RunError::TooLarge {
            dim,
            max: SCRIPT_DIM_MAX,
        });
    }
    let n = dims.len();
    let factors = script
        .systems
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let spec = script.init.iter().find(|(name, _)| *name == s.name).map(|(_, spec)| spec);
            initial_vector(spec, s.dim, derive_seed(seed, k as u64))
        })
        .collect::<qledger::Result<Vec<_>>>()?;
    let mut rho = PureState::product(&factors)?.to_density();

    let blocks = script.partition.as_ref().map(|p| {
        let (a, c, r) = (indices(script, &p.a), indices(script, &p.c), indices(script, &p.r));
        let mut ac: Vec<usize> = a.iter().chain(&c).copied().collect();
        ac.sort_unstable();
        Blocks { a, c, r, ac }
    });

    let mut rows = vec![row(INIT_LABEL, &rho, blocks.as_ref(), None)?];
    let mut unitaries: Vec<Option<CMatrix>> = Vec::with_capacity(script.steps.len());
    let index = |name: &String| script.system_index(name).expect("validated by the parser");

    for (j, step) in script.steps.iter().enumerate() {
        let unitary = match &step.op {
            Operation::Gate { gate, target } => {
                let t = index(target);
                Some(embed_unitary(&gate_matrix(*gate, dims[t]), &[t], &dims)?)
            }
            Operation::Controlled { gate, control, targets } => {
                let g = match gate {
                    ControlledGate::X => gates::pauli_x(),
                    ControlledGate::Z => gates::pauli_z(),
                };
                let cg = gates::controlled(&g);
                let c = index(control);
                let mut u = linalg::identity(dim);
                for t in targets {
                    u = embed_unitary(&cg, &[c, index(t)], &dims)? * u;
                }
                Some(u)
            }
            Operation::Haar { systems } => {
                let targets: Vec<usize> = systems.iter().map(index).collect();
                let local: usize = targets.iter().map(|&t| dims[t]).product();
                let mut rng = seeded_rng(derive_seed(seed, (n + j) as u64));
                let u = HaarUnitary::sample(local, &mut rng).to_matrix();
                Some(embed_unitary(&u, &targets, &dims)?)
            }
            Operation::Invert { step: label } => {
                let k = script.steps.iter().position(|s| s.label == *label).expect("validated by the parser");
                let u = unitaries[k].as_ref().expect("only unitary steps can be inverted");
                Some(u.adjoint())
            }
            Operation::Mix { system, branches } => {
                let t = index(system);
                let embedded = branches
                    .iter()
                    .map(|(p, g)| Ok((*p, embed_unitary(&gate_matrix(*g, dims[t]), &[t], &dims)?)))
                    .collect::<qledger::Result<Vec<_>>>()?;
                rho = apply_random_unitary_map(&RandomUnitaryMap::new(embedded)?, &rho)?;
                None
            }
            Operation::Measure { system, basis } => {
                let t = index(system);
                let vectors = basis_vectors(*basis, dims[t]);
                let channel = measure_and_reprepare(&Povm::projective(&vectors)?, &vectors)?;
                let mut out = CMatrix::zeros(dim, dim);
                for k in channel.operators() {
                    let full = embed_operator(k, &[t], &dims)?;
                    out += &full * rho.matrix() * full.adjoint();
                }
                rho = DensityMatrix::new(dims.clone(), out)?;
                None
            }
        };
        if let Some(u) = &unitary {
            rho = apply_unitary(u, &rho)?;
        }
        unitaries.push(unitary);
        let next = row(&step.label, &rho, blocks.as_ref(), rows.last())?;
        rows.push(next);
    }

    let checks = checks(script, &rows);
    Ok(ScriptRun {
        columns: script.columns(),
        rows,
        checks,
    })
}

fn checks(script: &ScenarioScript, rows: &[RowValues]) -> Vec<Check> {
    let tol = script.reports.tolerance();
    let mut out = Vec::new();
    for req in &script.reports.require {
        match req {
            Requirement::GlobalPurity => {
                let worst = rows.iter().map(|r| r.s_global).fold(0.0, f64::max);
                out.push(Check::at_most("global-purity: max S_global", worst, tol));
            }
            Requirement::Balance => {
                let worst = rows[1..].iter().map(|r| r.residual.abs()).fold(0.0, f64::max);
                out.push(Check::at_most("balance: max |residual|", worst, tol));
            }
        }
    }
    for e in &script.reports.expectations {
        let row = rows.iter().find(|r| r.label == e.step).expect("validated by the parser");
        let gap = (row.get(e.column) - e.value).abs();
        out.push(Check::at_most(
            format!("{}.{} = {}", e.step, e.column.name(), e.value),
            if gap.is_nan() { f64::INFINITY } else { gap },
            tol,
        ));
    }
    out
}
