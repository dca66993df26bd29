use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("hilbert space dimension {dim} exceeds the limit of {max}")]
    ResourceGuard { dim: usize, max: usize },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid subsystem selection: {0}")]
    InvalidSubsystems(String),

    #[error("cannot reduce to an empty set of subsystems")]
    EmptyReduction,

    #[error("rank {rank} out of range for dimension {dim}")]
    RankOutOfRange { rank: usize, dim: usize },

    #[error("operator is not unitary (max |U^dag U - I| = {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("kraus operators are not trace preserving (max |sum A^dag A - I| = {deviation:e})")]
    IncompleteKraus { deviation: f64 },

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("reprepare basis is not orthonormal: {0}")]
    NonOrthonormalBasis(String),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("initial state is not pure (purity {purity})")]
    NotPure { purity: f64 },

    #[error("purification broken: S(AC) = {s_ac}, S(R) = {s_r}")]
    PurificationMismatch { s_ac: f64, s_r: f64 },
}
