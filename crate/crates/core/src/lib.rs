//! Numerical laboratory for conditional-Fourier (CF) bosonic noise suppression.
//!
//! A single bosonic mode carrying an encoded qubit is sandwiched between two
//! hybrid qumode-qubit rotation gates `exp(i θ a†a n̂·σ)`. Heralding the qubit
//! ancilla on its initial state discards every noise event that flips the
//! photon-number parity, which removes the first-order term of the infidelity.
//!
//! The crate simulates this interferometer exactly on a truncated Fock space
//! and evaluates the matching closed-form expressions:
//!
//! - [`fock`], [`qubit`], [`hybrid`]: dense truncated-Fock linear algebra,
//!   qubit helpers and mode-qubit composite operators.
//! - [`codes`]: cat, binomial and finite-energy GKP codes.
//! - [`channels`]: loss, quantum-limited amplification, thermal, Gaussian
//!   displacement, qubit damping and depolarizing channels as Kraus lists.
//! - [`haar`] and [`fidelity`]: Haar moments, seeded sampling, spherical
//!   quadrature and logical-process averaging.
//! - [`suppression`], [`communication`]: the single-party and two-party
//!   protocols with their closed forms.
//! - [`optimize`]: conditional-displacement/rotation gate sequences and a
//!   deterministic simplex optimizer used as a comparison baseline.
//!
//! The crate is `no_std` (with `alloc`); IO lives in the companion `cfsupp-lab`
//! crate.

#![cfg_attr(not(test), no_std)]
#![warn(missing_docs)]
#![allow(clippy::many_single_char_names, clippy::too_many_arguments)]
// `!(x > 0.0)` style checks reject NaN on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod channels;
pub mod codes;
pub mod communication;
mod error;
pub mod fidelity;
pub mod fock;
pub mod haar;
pub mod hybrid;
pub mod optimize;
mod quadrature;
pub mod qubit;
pub mod suppression;

pub use error::{Error, Result};
pub use fock::{CMat, CVec, FockOperator, FockSpace};

pub use num_complex::Complex64;

/// Tolerance used when constructors verify Hermiticity or unitarity.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted for a density matrix after channel application.
pub const POSITIVITY_TOL: f64 = 1e-10;
