//! Single-qubit helpers: Pauli matrices, axis rotations and embedding of
//! one-qubit operators into a register.

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::fock::{CMat, CVec};
use crate::{Error, Result};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Unit axis on the Bloch sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis([f64; 3]);

impl Axis {
    /// `x̂`.
    pub const X: Self = Self([1.0, 0.0, 0.0]);
    /// `ŷ`.
    pub const Y: Self = Self([0.0, 1.0, 0.0]);
    /// `ẑ`.
    pub const Z: Self = Self([0.0, 0.0, 1.0]);

    /// Normalized axis; rejects the zero vector and non-unit input off by more
    /// than `1e−9`.
    pub fn new(v: [f64; 3]) -> Result<Self> {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(alloc::format!(
                "axis {v:?} is not a unit vector"
            )));
        }
        Ok(Self([v[0] / norm, v[1] / norm, v[2] / norm]))
    }

    /// Components.
    pub fn components(self) -> [f64; 3] {
        self.0
    }

    /// Dot product with another axis.
    pub fn dot(self, other: Self) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    /// `n̂·σ`.
    pub fn pauli(self) -> CMat {
        let [x, y, z] = self.0;
        CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::new(z, 0.0),
                Complex64::new(x, -y),
                Complex64::new(x, y),
                Complex64::new(-z, 0.0),
            ],
        )
    }

    /// `exp(i φ n̂·σ) = cos φ + i sin φ n̂·σ`.
    pub fn rotation(self, phi: f64) -> CMat {
        let (s, c) = phi.sin_cos();
        CMat::identity(2, 2) * Complex64::new(c, 0.0) + self.pauli() * (I * s)
    }
}

/// `σ_x`.
pub fn sigma_x() -> CMat {
    Axis::X.pauli()
}

/// `σ_y`.
pub fn sigma_y() -> CMat {
    Axis::Y.pauli()
}

/// `σ_z`.
pub fn sigma_z() -> CMat {
    Axis::Z.pauli()
}

/// Computational ket `|b⟩` for `b ∈ {0, 1}`.
pub fn ket(b: usize) -> CVec {
    let mut v = CVec::zeros(2);
    v[b & 1] = ONE;
    v
}

/// Register ket `|b_1 b_2 … b_q⟩` with qubit 1 most significant.
pub fn register_ket(bits: &[usize]) -> CVec {
    let dim = 1usize << bits.len();
    let mut idx = 0;
    for &b in bits {
        idx = (idx << 1) | (b & 1);
    }
    let mut v = CVec::zeros(dim);
    v[idx] = ONE;
    v
}

/// Embeds a one-qubit operator on `target` (0-based, most significant first)
/// of a `qubits`-qubit register.
pub fn embed(op: &CMat, target: usize, qubits: usize) -> CMat {
    let mut out = CMat::identity(1, 1);
    for q in 0..qubits {
        let factor = if q == target { op.clone() } else { CMat::identity(2, 2) };
        out = out.kronecker(&factor);
    }
    out
}

/// Fidelity `⟨ψ|ρ|ψ⟩` of a pure ket with a density matrix.
pub fn ket_fidelity(ket: &CVec, rho: &CMat) -> f64 {
    ket.dotc(&(rho * ket)).re
}
