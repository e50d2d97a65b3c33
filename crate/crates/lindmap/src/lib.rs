//! Dense numerics for detailed-balanced Lindbladians on small qudit rings.
//!
//! The crate assembles vectorized Lindbladian superoperators, checks quantum
//! detailed balance against a reference state, maps detailed-balanced
//! generators to Hermitian positive semi-definite super-Hamiltonians by three
//! independent routes, and exposes the diagnostics needed to certify the
//! mapping at desk scale: spectra and gaps, steady-state kernels, modular
//! (Bohr-frequency) decompositions, coefficient-matrix commutator checks,
//! locality decay profiles, operator-space entanglement, and the finite-size
//! gap criterion for frustration-free local term sets.
//!
//! Everything is dense and double precision. The practical ceiling is
//! `d = 2`, `n <= 7` sites for full superoperator pipelines (matrices of
//! side `4^n`), which is what the verification workloads here need.
//!
//! Conventions, fixed crate-wide:
//! - sites are indexed `0..n`; site `0` is the slowest tensor index,
//! - `vec` stacks operators row-major, so `vec(A X B) = (A ⊗ B^T) vec(X)`,
//! - entropies are in nats.

pub mod basis;
pub mod entanglement;
pub mod error;
pub mod knabe;
pub mod lattice;
pub mod lindblad;
pub mod models;
pub mod operator;
pub mod qdb;
pub mod random;
pub mod superham;

pub use error::{Error, Result};
pub use lattice::LatticeGeometry;
pub use operator::{CMat, CVec};
