//! Multipartite quantum states.
//!
//! A composite basis index enumerates the subsystem digits left to right:
//! subsystem 0 is the most significant digit. Every operation that reorders,
//! reduces or embeds respects that convention.

mod partition;
mod random;

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::linalg::{self, CMatrix, CVector, ONE, ZERO};
use crate::tol::{D_MAX, EPS_RANK, TOL_HERM, TOL_NORM, TOL_PSD, TOL_TRACE, TOL_UNITARY};
use crate::{Error, Result};

pub use partition::{Block, Partition};
pub use random::{
    derive_seed, random_density, random_density_with, random_pure_state, random_unitary,
    seeded_rng, HaarUnitary,
};

/// Product of `dims`, refusing zero factors and anything above [`D_MAX`].
pub fn checked_dim(dims: &[usize]) -> Result<usize> {
    let mut total: usize = 1;
    for &d in dims {
        if d == 0 {
            return Err(Error::InvalidSubsystems("zero-dimensional subsystem".into()));
        }
        total = match total.checked_mul(d) {
            Some(t) if t <= D_MAX => t,
            _ => {
                let dim = dims.iter().fold(1usize, |acc, &x| acc.saturating_mul(x));
                return Err(Error::ResourceGuard { dim, max: D_MAX });
            }
        };
    }
    Ok(total)
}

/// For every composite index, its index within the `selected` factors and
/// within the complementary factors.
fn split_indices(dims: &[usize], selected: &[bool]) -> (Vec<usize>, Vec<usize>) {
    let total: usize = dims.iter().product();
    let mut sel = Vec::with_capacity(total);
    let mut rest = Vec::with_capacity(total);
    for index in 0..total {
        let (mut rem, mut s, mut r, mut s_mul, mut r_mul) = (index, 0, 0, 1, 1);
        for k in (0..dims.len()).rev() {
            let digit = rem % dims[k];
            rem /= dims[k];
            if selected[k] {
                s += digit * s_mul;
                s_mul *= dims[k];
            } else {
                r += digit * r_mul;
                r_mul *= dims[k];
            }
        }
        sel.push(s);
        rest.push(r);
    }
    (sel, rest)
}

/// Validates a subsystem selection and returns its membership mask.
fn selection_mask(n: usize, indices: &[usize]) -> Result<Vec<bool>> {
    let mut mask = vec![false; n];
    for &k in indices {
        if k >= n {
            return Err(Error::InvalidSubsystems(format!(
                "subsystem {k} out of range for {n} subsystems"
            )));
        }
        if mask[k] {
            return Err(Error::InvalidSubsystems(format!("subsystem {k} listed twice")));
        }
        mask[k] = true;
    }
    Ok(mask)
}

/// A normalized state vector on a register of subsystems.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    dims: Vec<usize>,
    amplitudes: CVector,
}

impl PureState {
    /// Wraps `amplitudes`, which must already have unit norm.
    pub fn new(dims: Vec<usize>, amplitudes: CVector) -> Result<Self> {
        let dim = checked_dim(&dims)?;
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for total dimension {dim}",
                amplitudes.len()
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > TOL_NORM {
            return Err(Error::InvalidState(format!("state vector norm {norm} is not 1")));
        }
        Ok(Self { dims, amplitudes })
    }

    /// Like [`PureState::new`] but rescales a nonzero vector to unit norm.
    pub fn normalized(dims: Vec<usize>, amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm <= EPS_RANK {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        Self::new(dims, amplitudes.unscale(norm))
    }

    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let dim = checked_dim(&dims)?;
        if index >= dim {
            return Err(Error::DimensionMismatch(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amplitudes = CVector::zeros(dim);
        amplitudes[index] = ONE;
        Ok(Self { dims, amplitudes })
    }

    /// Tensor product of single-register states, in order.
    pub fn product(factors: &[PureState]) -> Result<Self> {
        let mut iter = factors.iter();
        let first = iter
            .next()
            .ok_or_else(|| Error::InvalidSubsystems("empty product".into()))?;
        iter.try_fold(first.clone(), |acc, f| acc.tensor(f))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn tensor(&self, other: &PureState) -> Result<Self> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        checked_dim(&dims)?;
        Ok(Self {
            dims,
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        })
    }

    /// `U |psi>` for a unitary on the whole register.
    pub fn evolve(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} unitary on dimension {}",
                u.nrows(),
                u.ncols(),
                self.dim()
            )));
        }
        let deviation = linalg::unitarity_defect(u);
        if deviation > TOL_UNITARY {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self {
            dims: self.dims.clone(),
            amplitudes: u * &self.amplitudes,
        })
    }

    /// Replaces the amplitudes, keeping the register layout. Used by
    /// factored evolutions that never materialize their unitary.
    pub fn with_amplitudes(&self, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for dimension {}",
                amplitudes.len(),
                self.dim()
            )));
        }
        Self::new(self.dims.clone(), amplitudes)
    }

    /// The amplitudes reshaped into a `dim(keep) x dim(rest)` matrix.
    fn bipartite_matrix(&self, keep: &[usize]) -> Result<CMatrix> {
        let mask = selection_mask(self.dims.len(), keep)?;
        let (sel, rest) = split_indices(&self.dims, &mask);
        let d_keep: usize = keep.iter().map(|&k| self.dims[k]).product();
        let d_rest = self.dim() / d_keep;
        let mut m = CMatrix::zeros(d_keep, d_rest);
        for (i, amp) in self.amplitudes.iter().enumerate() {
            m[(sel[i], rest[i])] = *amp;
        }
        Ok(m)
    }

    /// Reduced state on `keep`, computed as `M M^dag` from the reshaped
    /// amplitudes without forming the global projector.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::EmptyReduction);
        }
        let m = self.bipartite_matrix(&sorted(keep))?;
        let dims = sorted(keep).iter().map(|&k| self.dims[k]).collect();
        Ok(DensityMatrix::from_trusted(dims, &m * m.adjoint()))
    }

    /// Spectrum of the global projector `|psi><psi|`, obtained from the
    /// 1x1 Gram matrix `<psi|psi>` (the two share their nonzero eigenvalues).
    pub fn global_spectrum(&self) -> Vec<f64> {
        let mut spectrum = vec![0.0; self.dim()];
        spectrum[0] = self.amplitudes.norm_squared();
        spectrum
    }

    /// Eigenvalues of the reduction onto `keep`, computed from whichever of
    /// `M M^dag` and `M^dag M` is smaller. Both reductions of a pure state
    /// share this nonzero spectrum.
    pub fn schmidt_spectrum(&self, keep: &[usize]) -> Result<Vec<f64>> {
        if keep.is_empty() || keep.len() == self.dims.len() {
            selection_mask(self.dims.len(), keep)?;
            return Ok(vec![self.amplitudes.norm_squared()]);
        }
        let m = self.bipartite_matrix(&sorted(keep))?;
        let gram = if m.nrows() <= m.ncols() {
            &m * m.adjoint()
        } else {
            m.adjoint() * &m
        };
        Ok(linalg::hermitian_eigenvalues(&gram))
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &PureState) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm_sqr()
    }
}

fn sorted(indices: &[usize]) -> Vec<usize> {
    let mut v = indices.to_vec();
    v.sort_unstable();
    v
}

/// A mixed state on a register of subsystems.
///
/// Construction through [`DensityMatrix::new`] validates hermiticity, trace
/// and positivity eagerly. The stored matrix is always the Hermitian part of
/// its input. The spectrum is clamped: eigenvalues within `TOL_PSD` below
/// zero become zero and the remainder is renormalized to sum to one.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    matrix: CMatrix,
    spectrum: OnceLock<Vec<f64>>,
}

impl PartialEq for DensityMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.dims == other.dims && self.matrix == other.matrix
    }
}

impl DensityMatrix {
    pub fn new(dims: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        let dim = checked_dim(&dims)?;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for total dimension {dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let herm = linalg::hermiticity_defect(&matrix);
        if herm > TOL_HERM {
            return Err(Error::InvalidState(format!("not Hermitian (defect {herm:e})")));
        }
        let tr = linalg::trace(&matrix);
        if (tr.re - 1.0).abs() > TOL_TRACE || tr.im.abs() > TOL_TRACE {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let state = Self::from_trusted(dims, matrix);
        let raw = linalg::hermitian_eigenvalues(&state.matrix);
        let min = raw.last().copied().unwrap_or(0.0);
        if min < -TOL_PSD {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        let _ = state.spectrum.set(clamp_spectrum(raw));
        Ok(state)
    }

    /// Wraps a matrix produced by an operation that preserves validity up to
    /// rounding. Only symmetrizes.
    pub(crate) fn from_trusted(dims: Vec<usize>, matrix: CMatrix) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), matrix.nrows());
        Self {
            dims,
            matrix: linalg::hermitian_part(&matrix),
            spectrum: OnceLock::new(),
        }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let m = linalg::outer(psi.amplitudes(), psi.amplitudes());
        Self::from_trusted(psi.dims().to_vec(), m)
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let dim = checked_dim(&dims)?;
        Ok(Self::from_trusted(dims, linalg::identity(dim).unscale(dim as f64)))
    }

    /// A state diagonal in the computational basis.
    pub fn diagonal(dims: Vec<usize>, probabilities: &[f64]) -> Result<Self> {
        let dim = checked_dim(&dims)?;
        if probabilities.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "{} probabilities for dimension {dim}",
                probabilities.len()
            )));
        }
        let m = CMatrix::from_fn(dim, dim, |i, j| {
            if i == j {
                Complex64::new(probabilities[i], 0.0)
            } else {
                ZERO
            }
        });
        Self::new(dims, m)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Clamped, renormalized eigenvalues in descending order.
    pub fn spectrum(&self) -> &[f64] {
        self.spectrum
            .get_or_init(|| clamp_spectrum(linalg::hermitian_eigenvalues(&self.matrix)))
    }

    /// Eigenvalues above `EPS_RANK`.
    pub fn rank(&self) -> usize {
        self.spectrum().iter().filter(|&&v| v > EPS_RANK).count()
    }

    /// `Tr[rho^2]`, evaluated entrywise.
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(linalg::trace_distance(&self.matrix, &other.matrix))
    }

    /// Max-abs entrywise difference.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(linalg::max_abs_diff(&self.matrix, &other.matrix))
    }

    pub(crate) fn check_same_shape(&self, other: &DensityMatrix) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "dimensions {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }

    /// Reduced state on `keep`; see [`partial_trace`].
    pub fn reduce(&self, keep: &[usize]) -> Result<DensityMatrix> {
        partial_trace(self, keep)
    }

    /// Reorders the subsystems: factor `k` of the result is factor `order[k]`
    /// of `self`.
    pub fn permute(&self, order: &[usize]) -> Result<DensityMatrix> {
        let n = self.dims.len();
        if order.len() != n {
            return Err(Error::InvalidSubsystems(format!(
                "permutation of length {} for {n} subsystems",
                order.len()
            )));
        }
        selection_mask(n, order)?;
        let new_dims: Vec<usize> = order.iter().map(|&k| self.dims[k]).collect();
        let mut new_strides = vec![1usize; n];
        for k in (0..n.saturating_sub(1)).rev() {
            new_strides[k] = new_strides[k + 1] * new_dims[k + 1];
        }
        // position of old factor k in the new order
        let mut position = vec![0usize; n];
        for (new_k, &old_k) in order.iter().enumerate() {
            position[old_k] = new_k;
        }
        let dim = self.dim();
        let map: Vec<usize> = (0..dim)
            .map(|index| {
                let (mut rem, mut out) = (index, 0);
                for k in (0..n).rev() {
                    out += (rem % self.dims[k]) * new_strides[position[k]];
                    rem /= self.dims[k];
                }
                out
            })
            .collect();
        let mut m = CMatrix::zeros(dim, dim);
        for j in 0..dim {
            for i in 0..dim {
                m[(map[i], map[j])] = self.matrix[(i, j)];
            }
        }
        Ok(Self::from_trusted(new_dims, m))
    }
}

fn clamp_spectrum(mut values: Vec<f64>) -> Vec<f64> {
    for v in values.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let total: f64 = values.iter().sum();
    if total > 0.0 {
        for v in values.iter_mut() {
            *v /= total;
        }
    }
    values
}

/// Kronecker product; the subsystems of `a` precede those of `b`.
pub fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    let mut dims = a.dims.clone();
    dims.extend_from_slice(&b.dims);
    checked_dim(&dims)?;
    Ok(DensityMatrix::from_trusted(
        dims,
        linalg::kron(&a.matrix, &b.matrix),
    ))
}

/// Traces out every subsystem not in `keep`. Kept subsystems retain their
/// original relative order regardless of the order of `keep`.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::EmptyReduction);
    }
    let mask = selection_mask(rho.dims.len(), keep)?;
    let (sel, rest) = split_indices(&rho.dims, &mask);
    let keep = sorted(keep);
    let d_keep: usize = keep.iter().map(|&k| rho.dims[k]).product();
    let d_rest = rho.dim() / d_keep;

    // composite index of (kept digit, traced digit)
    let mut composite = vec![0usize; rho.dim()];
    for i in 0..rho.dim() {
        composite[sel[i] * d_rest + rest[i]] = i;
    }
    let mut out = CMatrix::zeros(d_keep, d_keep);
    for a in 0..d_keep {
        for b in 0..d_keep {
            let mut acc = ZERO;
            for t in 0..d_rest {
                acc += rho.matrix[(composite[a * d_rest + t], composite[b * d_rest + t])];
            }
            out[(a, b)] = acc;
        }
    }
    let dims = keep.iter().map(|&k| rho.dims[k]).collect();
    Ok(DensityMatrix::from_trusted(dims, out))
}

/// Standard purification `sum_k sqrt(l_k) |e_k>|k>` over the eigenpairs with
/// `l_k > EPS_RANK`.
///
/// The result lives on `rho.dims()` followed by one ancilla factor whose
/// dimension is the numerical rank. Tracing out that last factor recovers
/// `rho`.
pub fn purify(rho: &DensityMatrix) -> Result<PureState> {
    let (values, vectors) = linalg::hermitian_eigen(&rho.matrix);
    let kept: Vec<(usize, f64)> = values
        .iter()
        .copied()
        .enumerate()
        .filter(|&(_, v)| v > EPS_RANK)
        .collect();
    let rank = kept.len().max(1);
    let total: f64 = kept.iter().map(|&(_, v)| v).sum();
    let dim = rho.dim();
    let mut dims = rho.dims.clone();
    dims.push(rank);
    checked_dim(&dims)?;
    let mut amplitudes = CVector::zeros(dim * rank);
    for (slot, &(k, v)) in kept.iter().enumerate() {
        let weight = (v / total).sqrt();
        for i in 0..dim {
            amplitudes[i * rank + slot] = vectors[(i, k)] * weight;
        }
    }
    PureState::normalized(dims, amplitudes)
}

/// Lifts `op`, acting on the factors `targets` (in that order), to the full
/// register described by `dims`. Identity on every other factor.
pub fn embed_operator(op: &CMatrix, targets: &[usize], dims: &[usize]) -> Result<CMatrix> {
    let dim = checked_dim(dims)?;
    if targets.is_empty() {
        return Err(Error::InvalidSubsystems("no target subsystems".into()));
    }
    selection_mask(dims.len(), targets)?;
    let target_dims: Vec<usize> = targets.iter().map(|&t| dims[t]).collect();
    let d_target: usize = target_dims.iter().product();
    if op.nrows() != d_target || op.ncols() != d_target {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator on targets of total dimension {d_target}",
            op.nrows(),
            op.ncols()
        )));
    }
    let n = dims.len();
    let mut strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    // offset in the full register of each target-local basis index
    let offsets: Vec<usize> = (0..d_target)
        .map(|local| {
            let (mut rem, mut off) = (local, 0);
            for (pos, &t) in targets.iter().enumerate().rev() {
                off += (rem % target_dims[pos]) * strides[t];
                rem /= target_dims[pos];
            }
            off
        })
        .collect();
    let mut full = CMatrix::zeros(dim, dim);
    for j in 0..dim {
        let mut local_j = 0;
        let mut base = j;
        for (pos, &t) in targets.iter().enumerate() {
            let digit = (j / strides[t]) % dims[t];
            local_j = local_j * target_dims[pos] + digit;
            base -= digit * strides[t];
        }
        for (local_i, &off) in offsets.iter().enumerate() {
            let entry = op[(local_i, local_j)];
            if entry != ZERO {
                full[(base + off, j)] = entry;
            }
        }
    }
    Ok(full)
}

/// [`embed_operator`] for a unitary, checked against `TOL_UNITARY`.
pub fn embed_unitary(u: &CMatrix, targets: &[usize], dims: &[usize]) -> Result<CMatrix> {
    let deviation = linalg::unitarity_defect(u);
    if deviation > TOL_UNITARY {
        return Err(Error::NotUnitary { deviation });
    }
    embed_operator(u, targets, dims)
}

/// Standard single-qubit gates and the CNOT used throughout the scenarios.
pub mod gates {
    use super::*;

    pub fn pauli_x() -> CMatrix {
        linalg::real_matrix(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    pub fn pauli_y() -> CMatrix {
        CMatrix::from_row_slice(
            2,
            2,
            &[ZERO, Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), ZERO],
        )
    }

    pub fn pauli_z() -> CMatrix {
        linalg::real_matrix(&[&[1.0, 0.0], &[0.0, -1.0]])
    }

    pub fn hadamard() -> CMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        linalg::real_matrix(&[&[h, h], &[h, -h]])
    }

    pub fn phase_s() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, Complex64::new(0.0, 1.0)])
    }

    pub fn phase_t() -> CMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, Complex64::new(h, h)])
    }

    /// `|c><c| (x) g` summed with identity on the `|0>` branch: a
    /// two-qubit gate with the control first.
    pub fn controlled(g: &CMatrix) -> CMatrix {
        let mut m = linalg::identity(4);
        for i in 0..2 {
            for j in 0..2 {
                m[(2 + i, 2 + j)] = g[(i, j)];
            }
        }
        m
    }

    pub fn cnot() -> CMatrix {
        controlled(&pauli_x())
    }

    /// `(|0> + |1>) / sqrt(2)`.
    pub fn plus_state() -> PureState {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        PureState::new(
            vec![2],
            CVector::from_vec(vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)]),
        )
        .expect("unit norm")
    }
}
