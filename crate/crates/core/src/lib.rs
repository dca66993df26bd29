//! Density-matrix simulation with entropy bookkeeping.
//!
//! The crate is organized bottom-up:
//!
//! * [`states`] builds, composes, reduces and purifies finite-dimensional
//!   quantum states, and samples Haar-random states and unitaries.
//! * [`entropy`] evaluates von Neumann entropy, relative entropy and quantum
//!   and classical mutual information, all in bits.
//! * [`channels`] applies unitaries, Kraus maps, random-unitary mixtures and
//!   POVM statistics.
//! * [`ledger`] tracks how the entropies of an observer `A`, a system `C` and a
//!   purifying reservoir `R` change under purity-preserving evolution, and
//!   checks that local measurement statistics never reveal more than the
//!   quantum mutual information.
//! * [`scenarios`] replays the Stern-Gerlach erasure and energy-transfer
//!   experiments as entropy timelines.
//! * [`verify`] runs seeded randomized suites for the entropy inequalities.
//!
//! Subsystem ordering is big-endian throughout: subsystem 0 is the leftmost
//! tensor factor and the most significant digit of a composite basis index.

pub mod channels;
pub mod entropy;
mod error;
pub mod ledger;
pub mod linalg;
pub mod scenarios;
pub mod states;
pub mod tol;
pub mod verify;

pub use error::{Error, Result};
