//! Weak invariants of open quantum systems.
//!
//! A weak invariant is a time-dependent Hermitian observable whose spectrum
//! moves but whose expectation value stays fixed under the subsystem dynamics.
//! This crate builds such invariants for Kraus channels and Lindblad
//! generators, tracks how their fluctuation grows, and carries the classical
//! Fokker-Planck counterpart.
//!
//! The crate is `no_std` (it needs `alloc`); all I/O lives in the `weakinv`
//! binary crate.
//!
//! Units are natural: ħ = 1 and k_B = 1.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod eigen;
mod error;
mod math;
mod matrix;

pub mod channel;
pub mod diff;
pub mod fokker_planck;
pub mod lindblad;
pub mod models;
pub mod operator;
pub mod random;
pub mod thermo;

pub use error::{Error, Result};
pub use matrix::{pauli, Matrix, C64};
pub use operator::{DensityMatrix, HermitianOperator, Spectrum, Tolerances};
