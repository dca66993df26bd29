//! Seeded random states and Haar-random unitaries.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{checked_dim, DensityMatrix, PureState};
use crate::linalg::{CMatrix, CVector, ONE};
use crate::{Error, Result};

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a base seed with an index (splitmix64 finalizer), so that instance
/// seeds do not depend on evaluation order.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

fn gaussian_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> CVector {
    CVector::from_fn(len, |_, _| complex_gaussian(rng))
}

/// Haar-random pure state: a normalized complex-Gaussian vector.
pub fn random_pure_state<R: Rng + ?Sized>(dims: Vec<usize>, rng: &mut R) -> Result<PureState> {
    let dim = checked_dim(&dims)?;
    PureState::normalized(dims, gaussian_vector(dim, rng))
}

/// Random mixed state on `dims` of the given rank, obtained by tracing the
/// ancilla out of a Haar-random pure state on `dims (x) rank`.
pub fn random_density_with<R: Rng + ?Sized>(
    dims: Vec<usize>,
    rank: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    let dim = checked_dim(&dims)?;
    if rank == 0 || rank > dim {
        return Err(Error::RankOutOfRange { rank, dim });
    }
    let n = dims.len();
    let mut full = dims;
    full.push(rank);
    let psi = random_pure_state(full, rng)?;
    psi.reduced(&(0..n).collect::<Vec<_>>())
}

pub fn random_density(dim: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_density_with(vec![dim], rank, &mut seeded_rng(seed))
}

/// A Haar-distributed unitary kept in factored form.
///
/// This is the Householder QR of a complex-Gaussian matrix with the phases
/// of `R`'s diagonal folded back in, `U = H_0 H_1 ... H_{d-1} diag(phase)`.
/// Each reflector only needs the current column's trailing entries, which
/// are again i.i.d. Gaussian after the earlier reflections, so the columns
/// are drawn one at a time. Applying `U` or `U^dag` to a vector costs
/// `O(d^2)` and never materializes the matrix.
#[derive(Clone, Debug)]
pub struct HaarUnitary {
    dim: usize,
    /// Unit Householder vector for step `k`, acting on coordinates `k..dim`.
    reflectors: Vec<CVector>,
    phases: Vec<Complex64>,
}

impl HaarUnitary {
    pub fn sample<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let mut reflectors = Vec::with_capacity(dim);
        let mut phases = Vec::with_capacity(dim);
        for k in 0..dim {
            let x = gaussian_vector(dim - k, rng);
            let norm = x.norm();
            let head_phase = if x[0].norm() > 0.0 {
                x[0] / x[0].norm()
            } else {
                ONE
            };
            // H x = alpha e_0 with alpha = -phase(x_0) |x|
            let alpha = -head_phase * norm;
            let mut w = x;
            w[0] -= alpha;
            let w_norm = w.norm();
            reflectors.push(if w_norm > 0.0 { w.unscale(w_norm) } else { w });
            phases.push(-head_phase);
        }
        Self {
            dim,
            reflectors,
            phases,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn reflect(&self, k: usize, v: &mut CVector) {
        let w = &self.reflectors[k];
        let mut dot = Complex64::new(0.0, 0.0);
        for (i, wi) in w.iter().enumerate() {
            dot += wi.conj() * v[k + i];
        }
        let dot = dot * 2.0;
        for (i, wi) in w.iter().enumerate() {
            v[k + i] -= wi * dot;
        }
    }

    /// `U v`.
    pub fn apply(&self, v: &CVector) -> CVector {
        assert_eq!(v.len(), self.dim, "vector length must match the unitary");
        let mut out = v.clone();
        for (x, p) in out.iter_mut().zip(&self.phases) {
            *x *= p;
        }
        for k in (0..self.dim).rev() {
            self.reflect(k, &mut out);
        }
        out
    }

    /// `U^dag v`.
    pub fn apply_adjoint(&self, v: &CVector) -> CVector {
        assert_eq!(v.len(), self.dim, "vector length must match the unitary");
        let mut out = v.clone();
        for k in 0..self.dim {
            self.reflect(k, &mut out);
        }
        for (x, p) in out.iter_mut().zip(&self.phases) {
            *x *= p.conj();
        }
        out
    }

    pub fn to_matrix(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for j in 0..self.dim {
            let mut e = CVector::zeros(self.dim);
            e[j] = ONE;
            m.set_column(j, &self.apply(&e));
        }
        m
    }
}

/// Dense Haar-random unitary, deterministic per seed.
pub fn random_unitary(dim: usize, seed: u64) -> CMatrix {
    HaarUnitary::sample(dim, &mut seeded_rng(seed)).to_matrix()
}
