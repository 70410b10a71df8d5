//! Truncated Fock-space simulation of quantum illumination with engineered
//! non-Gaussian probes.
//!
//! The crate is organised bottom-up:
//!
//! - [`fock`]: ladder operators, beam-splitter unitaries, tensor products,
//!   partial traces and Hermitian matrix functions on dense matrices.
//! - [`engineer`]: two-mode squeezed vacuum, conditional photon
//!   addition/subtraction/catalysis, nonlocal photon addition and a
//!   brute-force four-mode oracle for the nonlocal circuit.
//! - [`channel`]: thermal-attenuator and pure-loss channels in Kraus form and
//!   the target-absent / target-present state pair.
//! - [`discriminate`]: Helstrom error, quantum Chernoff coefficient, K-copy
//!   error curves and heralding-weighted error exponents.
//! - [`receiver`]: receiver observables, hypothesis moments and the Gaussian
//!   threshold test.
//!
//! Mode order is fixed everywhere: idler `A` first, then the signal/return
//! mode `B`, then environments or auxiliaries.

pub mod channel;
pub mod discriminate;
pub mod engineer;
pub mod error;
pub mod fock;
pub mod receiver;
pub mod spectral;

pub use error::{Error, Result};
pub use fock::{CMatrix, CVector, DensityOperator, FockDims, FockRegister, ModeOperator, C64};
