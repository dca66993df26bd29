//! Entropy bookkeeping for an observer `A`, a system `C` and a reservoir `R`.
//!
//! When the joint state of `ACR` is pure and stays pure, `S(AC) = S(R)` at
//! every time. Expanding `S(A:C) = S(A) + S(C) - S(AC)` then gives the
//! balance
//!
//! ```text
//! dS(A) + dS(C) - dS(R) - dS(A:C) = 0
//! ```
//!
//! so without a reservoir absorbing entropy, any decrease of `S(A) + S(C)`
//! is paid for by an equal loss of quantum mutual information between
//! observer and system. [`verify_erasure_bound`] checks the companion
//! statement that the classical information local measurements can extract,
//! `I(A:C)`, never exceeds `S(A:C)`: once the quantum correlations are gone,
//! so is every record.

use crate::channels::{joint_local_distribution, Povm, RandomUnitaryMap};
use crate::entropy::{classical_mutual_information, mutual_information, von_neumann_entropy, Bits};
use crate::linalg::{self, CMatrix, CVector};
use crate::states::{embed_unitary, Block, DensityMatrix, Partition, PureState};
use crate::tol::{TOL_BALANCE, TOL_ENT, TOL_TRACE};
use crate::{Error, Result};

/// Block entropies of a pure `ACR` state at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockEntropies {
    pub s_a: Bits,
    pub s_c: Bits,
    pub s_r: Bits,
    pub s_ac: Bits,
}

impl BlockEntropies {
    /// Each term comes from its own reduced density matrix; `S(AC)` and
    /// `S(R)` are not inferred from one another.
    pub fn of(psi: &PureState, partition: &Partition) -> Result<Self> {
        partition.check_covers(psi.dims())?;
        let a = partition.indices(Block::A);
        let c = partition.indices(Block::C);
        let r = partition.indices(Block::R);
        let mut ac: Vec<usize> = a.iter().chain(&c).copied().collect();
        ac.sort_unstable();
        let entropy_of = |keep: &[usize]| -> Result<Bits> {
            if keep.is_empty() {
                Ok(0.0)
            } else {
                Ok(von_neumann_entropy(&psi.reduced(keep)?))
            }
        };
        Ok(Self {
            s_a: entropy_of(&a)?,
            s_c: entropy_of(&c)?,
            s_r: entropy_of(&r)?,
            s_ac: entropy_of(&ac)?,
        })
    }

    /// `S(A:C) = S(A) + S(C) - S(AC)`.
    pub fn mutual(&self) -> Bits {
        self.s_a + self.s_c - self.s_ac
    }

    fn check_purification(&self) -> Result<()> {
        if (self.s_ac - self.s_r).abs() > TOL_BALANCE {
            return Err(Error::PurificationMismatch {
                s_ac: self.s_ac,
                s_r: self.s_r,
            });
        }
        Ok(())
    }
}

/// Entropy changes of one evolution step.
#[derive(Clone, Debug, PartialEq)]
pub struct LedgerRecord {
    pub label: String,
    pub before: BlockEntropies,
    pub after: BlockEntropies,
    pub ds_a: Bits,
    pub ds_c: Bits,
    pub ds_r: Bits,
    pub ds_mutual: Bits,
    /// `ds_a + ds_c - ds_r - ds_mutual`.
    pub residual: Bits,
}

impl LedgerRecord {
    pub fn between(label: impl Into<String>, before: BlockEntropies, after: BlockEntropies) -> Self {
        let ds_a = after.s_a - before.s_a;
        let ds_c = after.s_c - before.s_c;
        let ds_r = after.s_r - before.s_r;
        let ds_mutual = after.mutual() - before.mutual();
        Self {
            label: label.into(),
            before,
            after,
            ds_a,
            ds_c,
            ds_r,
            ds_mutual,
            residual: balance(ds_a, ds_c, ds_r, ds_mutual),
        }
    }

    pub fn recomputed_residual(&self) -> Bits {
        balance(self.ds_a, self.ds_c, self.ds_r, self.ds_mutual)
    }

    pub fn is_balanced(&self) -> bool {
        self.residual.abs() <= TOL_BALANCE
    }

    /// Chains two consecutive steps into one covering both.
    pub fn then(&self, next: &LedgerRecord) -> LedgerRecord {
        LedgerRecord::between(format!("{}+{}", self.label, next.label), self.before, next.after)
    }
}

fn balance(ds_a: Bits, ds_c: Bits, ds_r: Bits, ds_mutual: Bits) -> Bits {
    ds_a + ds_c - ds_r - ds_mutual
}

/// A purity-preserving evolution of the whole `ACR` register.
#[derive(Clone, Debug)]
pub enum Evolution {
    Unitary(CMatrix),
    /// Realized by dilation: a branch-pointer ancilla of dimension equal to
    /// the branch count is appended to `R` in `|0>`, rotated to
    /// `sum_n sqrt(p_n) |n>`, and selects `U_n` by controlled application.
    RandomUnitary(RandomUnitaryMap),
}

/// Unitary `V` on the ancilla with `V|0> = sum_n sqrt(p_n) |n>`: a
/// Householder reflection between two real unit vectors.
fn branch_preparation(weights: &[f64]) -> CMatrix {
    let k = weights.len();
    let target: Vec<f64> = weights.iter().map(|p| p.sqrt()).collect();
    let mut w: Vec<f64> = target.iter().map(|t| -t).collect();
    w[0] += 1.0;
    let norm_sq: f64 = w.iter().map(|x| x * x).sum();
    let mut v = linalg::identity(k);
    if norm_sq > 0.0 {
        for i in 0..k {
            for j in 0..k {
                v[(i, j)] -= linalg::ONE * (2.0 * w[i] * w[j] / norm_sq);
            }
        }
    }
    v
}

/// Dilates a random-unitary map on `initial`'s register into a unitary on
/// the register extended by one trailing ancilla assigned to `R`.
pub fn dilate(
    map: &RandomUnitaryMap,
    initial: &PureState,
    partition: &Partition,
) -> Result<(PureState, CMatrix, Partition)> {
    let dim = initial.dim();
    if map.dim() != dim {
        return Err(Error::DimensionMismatch(format!(
            "map of dimension {} on a register of dimension {dim}",
            map.dim()
        )));
    }
    let k = map.branches().len();
    let mut dims = initial.dims().to_vec();
    dims.push(k);
    let extended = initial.tensor(&PureState::basis(vec![k], 0)?)?;

    let mut select = CMatrix::zeros(dim * k, dim * k);
    for (n, (_, u)) in map.branches().iter().enumerate() {
        for s in 0..dim {
            for t in 0..dim {
                select[(s * k + n, t * k + n)] = u[(s, t)];
            }
        }
    }
    let weights: Vec<f64> = map.branches().iter().map(|(p, _)| *p).collect();
    let prepare = embed_unitary(&branch_preparation(&weights), &[dims.len() - 1], &dims)?;
    Ok((extended, select * prepare, partition.extended(Block::R, 1)))
}

/// Entropy changes of `A`, `C`, `R` and `S(A:C)` under `evolution`.
pub fn entropy_ledger(
    initial: &PureState,
    evolution: &Evolution,
    partition: &Partition,
) -> Result<LedgerRecord> {
    partition.check_covers(initial.dims())?;
    let (start, unitary, partition) = match evolution {
        Evolution::Unitary(u) => (initial.clone(), u.clone(), partition.clone()),
        Evolution::RandomUnitary(map) => dilate(map, initial, partition)?,
    };
    let label = match evolution {
        Evolution::Unitary(_) => "unitary",
        Evolution::RandomUnitary(_) => "random-unitary",
    };
    let end = start.evolve(&unitary)?;
    let before = BlockEntropies::of(&start, &partition)?;
    let after = BlockEntropies::of(&end, &partition)?;
    before.check_purification()?;
    after.check_purification()?;
    Ok(LedgerRecord::between(label, before, after))
}

/// [`entropy_ledger`] for a state given as a density matrix, which must be
/// pure: `Tr[rho^2] >= 1 - TOL_TRACE`. Mixed states need [`crate::states::purify`]
/// first.
pub fn entropy_ledger_from_density(
    initial: &DensityMatrix,
    evolution: &Evolution,
    partition: &Partition,
) -> Result<LedgerRecord> {
    let psi = pure_vector(initial)?;
    entropy_ledger(&psi, evolution, partition)
}

fn pure_vector(rho: &DensityMatrix) -> Result<PureState> {
    let purity = rho.purity();
    if purity < 1.0 - TOL_TRACE {
        return Err(Error::NotPure { purity });
    }
    let (_, vectors) = linalg::hermitian_eigen(rho.matrix());
    let v: CVector = vectors.column(0).into_owned();
    PureState::normalized(rho.dims().to_vec(), v)
}

/// Two consecutive steps, e.g. an entropy-raising interaction followed by
/// the transformation that undoes it.
pub fn two_stage_ledger(
    initial: &PureState,
    rise: &CMatrix,
    fall: &CMatrix,
    partition: &Partition,
) -> Result<Vec<LedgerRecord>> {
    let mid = initial.evolve(rise)?;
    let mut first = entropy_ledger(initial, &Evolution::Unitary(rise.clone()), partition)?;
    let mut second = entropy_ledger(&mid, &Evolution::Unitary(fall.clone()), partition)?;
    first.label = "t0->t1".into();
    second.label = "t1->t2".into();
    Ok(vec![first, second])
}

/// Quantum against classical mutual information for one pair of local
/// measurements.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundRecord {
    pub quantum_mi: Bits,
    pub classical_mi: Bits,
    /// `quantum_mi - classical_mi`.
    pub slack: Bits,
}

impl BoundRecord {
    pub fn holds(&self) -> bool {
        self.slack >= -TOL_ENT
    }
}

/// Compares `S(A:C)` with the mutual information `I(A:C)` of the outcomes of
/// `povm_a` on `A` and `povm_c` on `C`.
pub fn verify_erasure_bound(
    rho: &DensityMatrix,
    partition: &Partition,
    povm_a: &Povm,
    povm_c: &Povm,
) -> Result<BoundRecord> {
    let joint = joint_local_distribution(rho, partition, povm_a, povm_c)?;
    let quantum_mi = mutual_information(rho, partition)?;
    let classical_mi = classical_mutual_information(&joint);
    Ok(BoundRecord {
        quantum_mi,
        classical_mi,
        slack: quantum_mi - classical_mi,
    })
}
