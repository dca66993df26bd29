//! Quantum dynamics in Kraus form, and local POVM statistics.

use num_complex::Complex64;
use rand::Rng;

use crate::entropy::JointDistribution;
use crate::linalg::{self, CMatrix, CVector};
use crate::states::{Block, DensityMatrix, HaarUnitary, Partition};
use crate::tol::{EPS_RANK, TOL_KRAUS, TOL_NORM, TOL_PROB, TOL_PSD, TOL_UNITARY};
use crate::{Error, Result};

fn check_square(op: &CMatrix, dim: usize, what: &str) -> Result<()> {
    if op.nrows() != dim || op.ncols() != dim {
        return Err(Error::DimensionMismatch(format!(
            "{what} is {}x{}, state dimension is {dim}",
            op.nrows(),
            op.ncols()
        )));
    }
    Ok(())
}

/// `U rho U^dag`.
pub fn apply_unitary(u: &CMatrix, rho: &DensityMatrix) -> Result<DensityMatrix> {
    check_square(u, rho.dim(), "unitary")?;
    let deviation = linalg::unitarity_defect(u);
    if deviation > TOL_UNITARY {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(DensityMatrix::from_trusted(
        rho.dims().to_vec(),
        u * rho.matrix() * u.adjoint(),
    ))
}

/// A completely positive trace-preserving map `rho -> sum_k A_k rho A_k^dag`.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    in_dim: usize,
    out_dim: usize,
    operators: Vec<CMatrix>,
}

impl KrausChannel {
    /// All operators must share one `out x in` shape and satisfy
    /// `sum A_k^dag A_k = I` within `TOL_KRAUS`.
    pub fn new(operators: Vec<CMatrix>) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| Error::IncompleteKraus { deviation: 1.0 })?;
        let (out_dim, in_dim) = first.shape();
        let mut sum = CMatrix::zeros(in_dim, in_dim);
        for a in &operators {
            if a.shape() != (out_dim, in_dim) {
                return Err(Error::DimensionMismatch(format!(
                    "kraus operator of shape {:?}, expected {:?}",
                    a.shape(),
                    (out_dim, in_dim)
                )));
            }
            sum += a.adjoint() * a;
        }
        let deviation = linalg::max_abs_diff(&sum, &linalg::identity(in_dim));
        if deviation > TOL_KRAUS {
            return Err(Error::IncompleteKraus { deviation });
        }
        Ok(Self {
            in_dim,
            out_dim,
            operators,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            in_dim: dim,
            out_dim: dim,
            operators: vec![linalg::identity(dim)],
        }
    }

    /// Kraus operators of an isometry `V: in -> out (x) env`, with the
    /// environment as the trailing factor: `A_k[o, i] = V[o * env + k, i]`.
    pub fn from_isometry(v: &CMatrix, out_dim: usize) -> Result<Self> {
        if out_dim == 0 || v.nrows() % out_dim != 0 {
            return Err(Error::DimensionMismatch(format!(
                "isometry with {} rows cannot split into output dimension {out_dim}",
                v.nrows()
            )));
        }
        let env = v.nrows() / out_dim;
        let operators = (0..env)
            .map(|k| CMatrix::from_fn(out_dim, v.ncols(), |o, i| v[(o * env + k, i)]))
            .collect();
        Self::new(operators)
    }

    /// Random channel from the first `in_dim` columns of a Haar unitary on
    /// `out_dim * n_kraus` dimensions.
    pub fn random<R: Rng + ?Sized>(
        in_dim: usize,
        out_dim: usize,
        n_kraus: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let big = out_dim * n_kraus;
        if big < in_dim {
            return Err(Error::DimensionMismatch(format!(
                "no isometry from dimension {in_dim} into {out_dim} x {n_kraus}"
            )));
        }
        let u = HaarUnitary::sample(big, rng).to_matrix();
        Self::from_isometry(&u.columns(0, in_dim).into_owned(), out_dim)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }
}

/// `N[rho] = sum_k A_k rho A_k^dag`. The output keeps the input's subsystem
/// layout when the dimension is unchanged and is a single factor otherwise.
pub fn apply_channel(channel: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if channel.in_dim != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "channel input dimension {} on a state of dimension {}",
            channel.in_dim,
            rho.dim()
        )));
    }
    let mut out = CMatrix::zeros(channel.out_dim, channel.out_dim);
    for a in &channel.operators {
        out += a * rho.matrix() * a.adjoint();
    }
    let dims = if channel.out_dim == rho.dim() {
        rho.dims().to_vec()
    } else {
        vec![channel.out_dim]
    };
    Ok(DensityMatrix::from_trusted(dims, out))
}

/// A coarse-grained evolution `rho -> sum_n p_n U_n rho U_n^dag`.
#[derive(Clone, Debug)]
pub struct RandomUnitaryMap {
    branches: Vec<(f64, CMatrix)>,
}

impl RandomUnitaryMap {
    pub fn new(branches: Vec<(f64, CMatrix)>) -> Result<Self> {
        let dim = branches
            .first()
            .map(|(_, u)| u.nrows())
            .ok_or_else(|| Error::InvalidDistribution("no branches".into()))?;
        let mut total = 0.0;
        for (p, u) in &branches {
            if !p.is_finite() || *p < 0.0 {
                return Err(Error::InvalidDistribution(format!("branch weight {p}")));
            }
            total += p;
            check_square(u, dim, "branch unitary")?;
            let deviation = linalg::unitarity_defect(u);
            if deviation > TOL_UNITARY {
                return Err(Error::NotUnitary { deviation });
            }
        }
        if (total - 1.0).abs() > TOL_PROB {
            return Err(Error::InvalidDistribution(format!(
                "branch weights sum to {total}"
            )));
        }
        Ok(Self { branches })
    }

    pub fn dim(&self) -> usize {
        self.branches[0].1.nrows()
    }

    pub fn branches(&self) -> &[(f64, CMatrix)] {
        &self.branches
    }

    /// Kraus form with `A_n = sqrt(p_n) U_n`.
    pub fn to_kraus(&self) -> KrausChannel {
        KrausChannel {
            in_dim: self.dim(),
            out_dim: self.dim(),
            operators: self
                .branches
                .iter()
                .map(|(p, u)| u.scale(p.sqrt()))
                .collect(),
        }
    }
}

pub fn apply_random_unitary_map(
    map: &RandomUnitaryMap,
    rho: &DensityMatrix,
) -> Result<DensityMatrix> {
    check_square(&map.branches[0].1, rho.dim(), "branch unitary")?;
    let mut out = CMatrix::zeros(rho.dim(), rho.dim());
    for (p, u) in &map.branches {
        out += (u * rho.matrix() * u.adjoint()).scale(*p);
    }
    Ok(DensityMatrix::from_trusted(rho.dims().to_vec(), out))
}

/// Positive operators summing to the identity.
#[derive(Clone, Debug)]
pub struct Povm {
    elements: Vec<CMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<CMatrix>) -> Result<Self> {
        let dim = elements
            .first()
            .map(|e| e.nrows())
            .ok_or_else(|| Error::InvalidPovm("no elements".into()))?;
        let mut sum = CMatrix::zeros(dim, dim);
        for (n, e) in elements.iter().enumerate() {
            check_square(e, dim, "POVM element")?;
            let herm = linalg::hermiticity_defect(e);
            if herm > TOL_PSD {
                return Err(Error::InvalidPovm(format!(
                    "element {n} is not Hermitian (defect {herm:e})"
                )));
            }
            let min = linalg::hermitian_eigenvalues(e).last().copied().unwrap_or(0.0);
            if min < -TOL_PSD {
                return Err(Error::InvalidPovm(format!(
                    "element {n} has negative eigenvalue {min:e}"
                )));
            }
            sum += e;
        }
        let deviation = linalg::max_abs_diff(&sum, &linalg::identity(dim));
        if deviation > TOL_KRAUS {
            return Err(Error::InvalidPovm(format!(
                "elements sum to identity only within {deviation:e}"
            )));
        }
        Ok(Self { elements })
    }

    /// Rank-one projectors onto an orthonormal basis.
    pub fn projective(basis: &[CVector]) -> Result<Self> {
        check_orthonormal(basis)?;
        Self::new(basis.iter().map(|b| linalg::outer(b, b)).collect())
    }

    /// Projective measurement in the computational basis.
    pub fn computational(dim: usize) -> Self {
        Self {
            elements: (0..dim)
                .map(|k| {
                    let mut e = CMatrix::zeros(dim, dim);
                    e[(k, k)] = linalg::ONE;
                    e
                })
                .collect(),
        }
    }

    /// Random POVM with `outcomes` elements of random rank,
    /// `Pi_n = S^{-1/2} G_n S^{-1/2}` where `G_n = B_n^dag B_n` for Gaussian
    /// `B_n` and `S = sum_n G_n`.
    pub fn random<R: Rng + ?Sized>(dim: usize, outcomes: usize, rng: &mut R) -> Result<Self> {
        if outcomes == 0 {
            return Err(Error::InvalidPovm("no outcomes".into()));
        }
        let mut ranks: Vec<usize> = (0..outcomes).map(|_| rng.random_range(1..=dim)).collect();
        // ranks must cover the space for S to be invertible
        let covered: usize = ranks[..outcomes - 1].iter().sum();
        let last = &mut ranks[outcomes - 1];
        *last = (*last).max(dim.saturating_sub(covered)).min(dim);
        let gs: Vec<CMatrix> = ranks
            .iter()
            .map(|&rank| {
                let b = CMatrix::from_fn(rank, dim, |_, _| {
                    Complex64::new(
                        rng.sample(rand_distr::StandardNormal),
                        rng.sample(rand_distr::StandardNormal),
                    )
                });
                b.adjoint() * b
            })
            .collect();
        let total = gs.iter().fold(CMatrix::zeros(dim, dim), |acc, g| acc + g);
        let inv_sqrt = linalg::hermitian_map(&total, |v| 1.0 / v.sqrt());
        Self::new(
            gs.iter()
                .map(|g| linalg::hermitian_part(&(&inv_sqrt * g * &inv_sqrt)))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    /// Outcome probabilities `Tr[Pi_n rho]`.
    pub fn probabilities(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        check_square(&self.elements[0], rho.dim(), "POVM element")?;
        Ok(self
            .elements
            .iter()
            .map(|e| linalg::trace_of_product(e, rho.matrix()).re)
            .collect())
    }
}

fn check_orthonormal(basis: &[CVector]) -> Result<()> {
    let dim = basis.first().map_or(0, |b| b.len());
    for (i, bi) in basis.iter().enumerate() {
        if bi.len() != dim {
            return Err(Error::NonOrthonormalBasis(format!(
                "vector {i} has length {}, expected {dim}",
                bi.len()
            )));
        }
        for (j, bj) in basis.iter().enumerate().skip(i) {
            let expected = if i == j { 1.0 } else { 0.0 };
            let dev = (bi.dotc(bj) - Complex64::new(expected, 0.0)).norm();
            if dev > TOL_NORM {
                return Err(Error::NonOrthonormalBasis(format!(
                    "<b{i}|b{j}> deviates by {dev:e}"
                )));
            }
        }
    }
    Ok(())
}

/// The channel `rho -> sum_n Tr[Pi_n rho] |n><n|`, with `|n>` taken from
/// `basis`.
///
/// Each element is diagonalized, `Pi_n = sum_m p_m |v_m><v_m|`, and
/// contributes Kraus operators `|n><v_m| sqrt(p_m)` for every `p_m >
/// EPS_RANK`. A zero element contributes none.
pub fn measure_and_reprepare(povm: &Povm, basis: &[CVector]) -> Result<KrausChannel> {
    if basis.len() != povm.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} reprepare states for {} outcomes",
            basis.len(),
            povm.len()
        )));
    }
    check_orthonormal(basis)?;
    let mut operators = Vec::new();
    for (element, target) in povm.elements.iter().zip(basis) {
        let (values, vectors) = linalg::hermitian_eigen(element);
        for (m, &p) in values.iter().enumerate() {
            if p > EPS_RANK {
                let v = vectors.column(m).into_owned();
                operators.push(linalg::outer(target, &v).scale(p.sqrt()));
            }
        }
    }
    KrausChannel::new(operators)
}

/// Joint outcome table `p_ij = Tr[(Pi_i^a (x) Pi_j^c) rho_AC]` for local
/// measurements on blocks `A` and `C`; `R` is traced out.
pub fn joint_local_distribution(
    rho: &DensityMatrix,
    partition: &Partition,
    povm_a: &Povm,
    povm_c: &Povm,
) -> Result<JointDistribution> {
    partition.check_covers(rho.dims())?;
    let a = partition.indices(Block::A);
    let c = partition.indices(Block::C);
    let (d_a, d_c) = (
        partition.block_dim(Block::A, rho.dims()),
        partition.block_dim(Block::C, rho.dims()),
    );
    if povm_a.dim() != d_a || povm_c.dim() != d_c {
        return Err(Error::DimensionMismatch(format!(
            "POVMs of dimension {} and {} for blocks of dimension {d_a} and {d_c}",
            povm_a.dim(),
            povm_c.dim()
        )));
    }
    let mut ac: Vec<usize> = a.iter().chain(&c).copied().collect();
    ac.sort_unstable();
    let reduced = if ac.len() == rho.dims().len() {
        rho.clone()
    } else {
        rho.reduce(&ac)?
    };
    // bring A's factors in front of C's
    let order: Vec<usize> = a
        .iter()
        .chain(&c)
        .map(|k| ac.iter().position(|x| x == k).expect("index present"))
        .collect();
    let ordered = reduced.permute(&order)?;

    let mut p = Vec::with_capacity(povm_a.len() * povm_c.len());
    for pa in &povm_a.elements {
        for pc in &povm_c.elements {
            let effect = linalg::kron(pa, pc);
            p.push(linalg::trace_of_product(&effect, ordered.matrix()).re);
        }
    }
    // POVM completeness is only enforced to TOL_KRAUS
    let total: f64 = p.iter().sum();
    let p = p.iter().map(|x| x / total).collect();
    JointDistribution::new(povm_a.len(), povm_c.len(), p)
}
