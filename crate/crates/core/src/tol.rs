//! Numerical tolerances shared by every module.

/// Max-abs deviation allowed between a density matrix and its adjoint.
pub const TOL_HERM: f64 = 1e-10;
/// Allowed deviation of a trace from one.
pub const TOL_TRACE: f64 = 1e-10;
/// Eigenvalues in `[-TOL_PSD, 0)` are treated as numerical zeros.
pub const TOL_PSD: f64 = 1e-9;
/// Max-abs deviation of `U^dag U` from the identity.
pub const TOL_UNITARY: f64 = 1e-10;
/// Reconstruction error allowed when undoing a purification.
pub const TOL_RECON: f64 = 1e-9;
/// Eigenvalues at or below this count as outside the support.
pub const EPS_RANK: f64 = 1e-12;
/// Allowed deviation of a state vector's 2-norm from one.
pub const TOL_NORM: f64 = 1e-10;
/// Slack for entropy inequalities, in bits.
pub const TOL_ENT: f64 = 1e-9;
/// Allowed deviation of a probability total from one.
pub const TOL_PROB: f64 = 1e-10;
/// Completeness slack for Kraus operators and POVM elements.
pub const TOL_KRAUS: f64 = 1e-8;
/// Bound on the entropy-balance residual, in bits.
pub const TOL_BALANCE: f64 = 1e-8;
/// Largest composite Hilbert-space dimension any operation will build.
pub const D_MAX: usize = 4096;
