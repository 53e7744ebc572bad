//! Truncated Fock-space states and operators.
//!
//! Everything is stored densely. A [`FockSpace`] of cutoff `N` holds the levels
//! `|0⟩ … |N−1⟩`; operators are `N×N` complex matrices. Kraus operators of the
//! bosonic channels move every Fock level by the same amount, so they get a
//! compact [`ShiftOperator`] form that is applied in `O(N²)` instead of `O(N³)`.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Mul;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result, HERMITIAN_TOL};

/// Dense complex matrix.
pub type CMat = DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVec = DVector<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Coherent tails heavier than this are rejected.
pub const MAX_TAIL_WEIGHT: f64 = 1e-6;
/// Coherent tails heavier than this are accepted with a warning.
pub const WARN_TAIL_WEIGHT: f64 = 1e-10;

/// Truncated single-mode Fock space with levels `0..cutoff`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FockSpace {
    cutoff: usize,
}

impl FockSpace {
    /// Cutoff used by the experiment driver unless overridden.
    pub const DEFAULT_CUTOFF: usize = 60;

    /// Creates a space with `cutoff` levels.
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff < 2 {
            return Err(Error::InvalidCutoff(cutoff));
        }
        Ok(Self { cutoff })
    }

    /// Number of Fock levels.
    pub fn cutoff(self) -> usize {
        self.cutoff
    }

    /// Number Fock ket `|n⟩`.
    pub fn ket(self, n: usize) -> Result<CVec> {
        if n >= self.cutoff {
            return Err(Error::CutoffExceeded {
                needed: n + 1,
                cutoff: self.cutoff,
            });
        }
        let mut v = CVec::zeros(self.cutoff);
        v[n] = ONE;
        Ok(v)
    }

    /// Vacuum ket `|0⟩`.
    pub fn vacuum(self) -> CVec {
        let mut v = CVec::zeros(self.cutoff);
        v[0] = ONE;
        v
    }

    /// Projector `|ψ⟩⟨ψ|`.
    pub fn projector(self, ket: &CVec) -> Result<CMat> {
        self.check_ket(ket)?;
        Ok(ket * ket.adjoint())
    }

    pub(crate) fn check_ket(self, ket: &CVec) -> Result<()> {
        if ket.len() != self.cutoff {
            return Err(Error::DimensionMismatch {
                expected: self.cutoff,
                found: ket.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_square(self, m: &CMat) -> Result<()> {
        if m.nrows() != self.cutoff || m.ncols() != self.cutoff {
            return Err(Error::DimensionMismatch {
                expected: self.cutoff,
                found: m.nrows().max(m.ncols()),
            });
        }
        Ok(())
    }
}

/// Dense operator on a truncated Fock space.
#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator {
    space: FockSpace,
    matrix: CMat,
}

impl FockOperator {
    /// Wraps an `N×N` matrix.
    pub fn from_matrix(space: FockSpace, matrix: CMat) -> Result<Self> {
        space.check_square(&matrix)?;
        Ok(Self { space, matrix })
    }

    /// Wraps a matrix and verifies `‖M − M†‖ < 1e−12`.
    pub fn hermitian(space: FockSpace, matrix: CMat) -> Result<Self> {
        let op = Self::from_matrix(space, matrix)?;
        let defect = op.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::NotPhysical {
                what: "hermiticity",
                defect,
            });
        }
        Ok(op)
    }

    /// Wraps a matrix and verifies unitarity on the levels `0..levels`, the
    /// block a truncated ladder construction leaves intact.
    pub fn unitary(space: FockSpace, matrix: CMat, levels: usize) -> Result<Self> {
        let op = Self::from_matrix(space, matrix)?;
        let defect = op.unitarity_defect(levels);
        if defect > HERMITIAN_TOL {
            return Err(Error::NotPhysical {
                what: "unitarity",
                defect,
            });
        }
        Ok(op)
    }

    /// Identity.
    pub fn identity(space: FockSpace) -> Self {
        Self {
            space,
            matrix: CMat::identity(space.cutoff, space.cutoff),
        }
    }

    /// Annihilation operator: `⟨n−1|a|n⟩ = √n`.
    pub fn annihilation(space: FockSpace) -> Self {
        let n = space.cutoff;
        let mut m = CMat::zeros(n, n);
        for k in 1..n {
            m[(k - 1, k)] = Complex64::new((k as f64).sqrt(), 0.0);
        }
        Self { space, matrix: m }
    }

    /// Creation operator `a†`.
    pub fn creation(space: FockSpace) -> Self {
        Self::annihilation(space).adjoint()
    }

    /// Number operator `a†a`.
    pub fn number(space: FockSpace) -> Self {
        Self::number_power_diag(space, |n| n as f64)
    }

    /// Diagonal operator `f(a†a) = diag(f(0), …, f(N−1))`.
    pub fn number_power_diag(space: FockSpace, f: impl Fn(usize) -> f64) -> Self {
        Self::diagonal(space, |n| Complex64::new(f(n), 0.0))
    }

    /// Diagonal operator with complex entries.
    pub fn diagonal(space: FockSpace, f: impl Fn(usize) -> Complex64) -> Self {
        let n = space.cutoff;
        let d = CVec::from_iterator(n, (0..n).map(f));
        Self {
            space,
            matrix: CMat::from_diagonal(&d),
        }
    }

    /// Rescaling operator `x^{a†a}` (with `0⁰ = 1`).
    pub fn rescaling(space: FockSpace, x: f64) -> Self {
        Self::number_power_diag(space, |n| powi(x, n))
    }

    /// Phase rotation `exp(i θ a†a)`.
    pub fn rotation(space: FockSpace, theta: f64) -> Self {
        Self::diagonal(space, |n| Complex64::from_polar(1.0, theta * n as f64))
    }

    /// Photon-number parity `(−1)^{a†a}`.
    pub fn parity(space: FockSpace) -> Self {
        Self::number_power_diag(space, |n| if n % 2 == 0 { 1.0 } else { -1.0 })
    }

    /// Position quadrature `(a + a†)/√2`.
    pub fn position(space: FockSpace) -> Self {
        let a = Self::annihilation(space);
        let m = (&a.matrix + a.matrix.adjoint()) * Complex64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self { space, matrix: m }
    }

    /// Momentum quadrature `(a − a†)/(i√2)`.
    pub fn momentum(space: FockSpace) -> Self {
        let a = Self::annihilation(space);
        let m = (&a.matrix - a.matrix.adjoint()) * Complex64::new(0.0, -core::f64::consts::FRAC_1_SQRT_2);
        Self { space, matrix: m }
    }

    /// Underlying space.
    pub fn space(&self) -> FockSpace {
        self.space
    }

    /// Matrix entries.
    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// Consumes the operator and returns its matrix.
    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    /// Hermitian adjoint.
    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space,
            matrix: self.matrix.adjoint(),
        }
    }

    /// Commutator `[A, B]`.
    pub fn commutator(&self, other: &Self) -> Self {
        let m = &self.matrix * &other.matrix - &other.matrix * &self.matrix;
        Self {
            space: self.space,
            matrix: m,
        }
    }

    /// Integer power.
    pub fn pow(&self, k: usize) -> Self {
        let mut out = Self::identity(self.space);
        for _ in 0..k {
            out.matrix = &out.matrix * &self.matrix;
        }
        out
    }

    /// `‖M − M†‖_max`.
    pub fn hermiticity_defect(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    /// `‖M†M − 1‖_max` restricted to the levels `0..levels`.
    pub fn unitarity_defect(&self, levels: usize) -> f64 {
        let levels = levels.min(self.space.cutoff);
        let g = self.matrix.adjoint() * &self.matrix;
        let mut worst = 0.0_f64;
        for i in 0..levels {
            for j in 0..levels {
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((g[(i, j)] - target).norm());
            }
        }
        worst
    }

    /// `tr{ρ M}`.
    pub fn expectation(&self, rho: &CMat) -> Result<Complex64> {
        self.space.check_square(rho)?;
        Ok(trace_product(rho, &self.matrix))
    }

    /// `⟨ψ|M|ψ⟩`.
    pub fn ket_expectation(&self, ket: &CVec) -> Result<Complex64> {
        self.space.check_ket(ket)?;
        Ok(ket.dotc(&(&self.matrix * ket)))
    }
}

impl Mul for &FockOperator {
    type Output = FockOperator;

    fn mul(self, rhs: &FockOperator) -> FockOperator {
        FockOperator {
            space: self.space,
            matrix: &self.matrix * &rhs.matrix,
        }
    }
}

/// Operator that maps every Fock level by a fixed shift:
/// `K|n⟩ = w_n |n + shift⟩`, with terms leaving the space dropped.
///
/// Loss and amplifier Kraus operators, and their products, all have this form.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftOperator {
    space: FockSpace,
    shift: isize,
    weights: Vec<f64>,
}

impl ShiftOperator {
    /// Builds `K|n⟩ = weight(n) |n + shift⟩`.
    pub fn new(space: FockSpace, shift: isize, weight: impl Fn(usize) -> f64) -> Self {
        let n = space.cutoff;
        let weights = (0..n)
            .map(|k| {
                let target = k as isize + shift;
                if target < 0 || target >= n as isize {
                    0.0
                } else {
                    weight(k)
                }
            })
            .collect();
        Self { space, shift, weights }
    }

    /// `f(a†a) a^l`.
    pub fn lowering(space: FockSpace, l: usize, f: impl Fn(usize) -> f64) -> Self {
        Self::new(space, -(l as isize), |n| f(n - l) * falling_sqrt(n, l))
    }

    /// `a†^k f(a†a)`.
    pub fn raising(space: FockSpace, k: usize, f: impl Fn(usize) -> f64) -> Self {
        Self::new(space, k as isize, |n| f(n) * falling_sqrt(n + k, k))
    }

    /// Fock-level shift.
    pub fn shift(&self) -> isize {
        self.shift
    }

    /// Per-level weights `w_n` (zero where `n + shift` leaves the space).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Underlying space.
    pub fn space(&self) -> FockSpace {
        self.space
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        let n = self.space.cutoff as isize;
        let weights = (0..self.space.cutoff)
            .map(|k| {
                let mid = k as isize + other.shift;
                if mid < 0 || mid >= n {
                    0.0
                } else {
                    other.weights[k] * self.weights[mid as usize]
                }
            })
            .collect();
        let mut out = Self {
            space: self.space,
            shift: self.shift + other.shift,
            weights,
        };
        out.drop_escaping();
        out
    }

    fn drop_escaping(&mut self) {
        let n = self.space.cutoff as isize;
        for (k, w) in self.weights.iter_mut().enumerate() {
            let t = k as isize + self.shift;
            if t < 0 || t >= n {
                *w = 0.0;
            }
        }
    }

    /// True when every weight is zero.
    pub fn is_zero(&self) -> bool {
        self.weights.iter().all(|w| *w == 0.0)
    }

    /// Diagonal of `K†K`.
    pub fn gram_diagonal(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w * w).collect()
    }

    /// Dense form.
    pub fn to_operator(&self) -> FockOperator {
        let n = self.space.cutoff;
        let mut m = CMat::zeros(n, n);
        for (k, &w) in self.weights.iter().enumerate() {
            if w != 0.0 {
                let t = (k as isize + self.shift) as usize;
                m[(t, k)] = Complex64::new(w, 0.0);
            }
        }
        FockOperator {
            space: self.space,
            matrix: m,
        }
    }

    /// `K ψ`.
    pub fn apply_ket(&self, ket: &CVec) -> CVec {
        let mut out = CVec::zeros(ket.len());
        for (k, &w) in self.weights.iter().enumerate() {
            if w != 0.0 {
                let t = (k as isize + self.shift) as usize;
                out[t] = ket[k] * w;
            }
        }
        out
    }

    /// Accumulates `(K ⊗ 1) X (K ⊗ 1)†` into `out`, where `X` lives on the mode
    /// tensored with an auxiliary factor of dimension `aux` (mode index major).
    pub(crate) fn sandwich_into(&self, x: &CMat, aux: usize, out: &mut CMat) {
        let n = self.space.cutoff;
        let s = self.shift;
        for src_c in 0..n {
            let wc = self.weights[src_c];
            if wc == 0.0 {
                continue;
            }
            let dst_c = (src_c as isize + s) as usize;
            for src_r in 0..n {
                let wr = self.weights[src_r];
                if wr == 0.0 {
                    continue;
                }
                let dst_r = (src_r as isize + s) as usize;
                let w = wr * wc;
                for bc in 0..aux {
                    let col_in = src_c * aux + bc;
                    let col_out = dst_c * aux + bc;
                    for br in 0..aux {
                        out[(dst_r * aux + br, col_out)] += x[(src_r * aux + br, col_in)] * w;
                    }
                }
            }
        }
    }
}

/// `√(n!/(n−k)!)`, the norm factor of `a^k|n⟩`. Zero when `k > n`.
pub fn falling_sqrt(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut acc = 1.0;
    for j in (n - k + 1)..=n {
        acc *= j as f64;
    }
    acc.sqrt()
}

/// `x^n` with `0⁰ = 1`.
pub(crate) fn powi(x: f64, n: usize) -> f64 {
    let mut acc = 1.0;
    let mut base = x;
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    acc
}

/// Coherent ket `|α⟩`, renormalized after truncation.
///
/// Fails with [`Error::TailTooLarge`] if more than `1e−6` of the norm lies at
/// or above the cutoff.
pub fn coherent_ket(space: FockSpace, alpha: Complex64) -> Result<CVec> {
    let (ket, tail) = coherent_ket_with_tail(space, alpha);
    if tail > MAX_TAIL_WEIGHT {
        return Err(Error::TailTooLarge { weight: tail });
    }
    if tail > WARN_TAIL_WEIGHT {
        log::warn!(
            "coherent state |{alpha}> loses {tail:.2e} of its norm at cutoff {}",
            space.cutoff
        );
    }
    Ok(ket)
}

/// Coherent ket together with the norm weight discarded by truncation.
pub fn coherent_ket_with_tail(space: FockSpace, alpha: Complex64) -> (CVec, f64) {
    let n = space.cutoff;
    let prefactor = (-alpha.norm_sqr() / 2.0).exp();
    let mut amps = vec![ZERO; n];
    let mut c = Complex64::new(prefactor, 0.0);
    for (k, amp) in amps.iter_mut().enumerate() {
        if k > 0 {
            c = c * alpha / (k as f64).sqrt();
        }
        *amp = c;
    }
    // Continue the recurrence past the cutoff to measure the tail directly.
    let mut tail = 0.0;
    let mut k = n;
    loop {
        c = c * alpha / (k as f64).sqrt();
        let w = c.norm_sqr();
        tail += w;
        if (w < 1e-300 || w < tail * 1e-17) && k as f64 > alpha.norm_sqr() {
            break;
        }
        k += 1;
    }
    let mut v = CVec::from_vec(amps);
    let norm = v.norm();
    if norm > 0.0 {
        v /= Complex64::new(norm, 0.0);
    }
    (v, tail)
}

/// Kronecker product `A ⊗ B`.
pub fn tensor(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// `tr{A B}` without forming the product.
pub fn trace_product(a: &CMat, b: &CMat) -> Complex64 {
    let mut acc = ZERO;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Largest entry modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Photon-number weight of `ket` on even (`true`) or odd (`false`) levels.
pub fn parity_weight(ket: &CVec, even: bool) -> f64 {
    ket.iter()
        .enumerate()
        .filter(|(n, _)| (n % 2 == 0) == even)
        .map(|(_, z)| z.norm_sqr())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn space(n: usize) -> FockSpace {
        FockSpace::new(n).unwrap()
    }

    #[test]
    fn cutoff_below_two_is_rejected() {
        assert_eq!(FockSpace::new(1), Err(Error::InvalidCutoff(1)));
        assert!(FockSpace::new(2).is_ok());
    }

    #[test]
    fn annihilation_smallest_cutoff() {
        let s = space(2);
        let a = FockOperator::annihilation(s);
        let one = s.ket(1).unwrap();
        let out = a.matrix() * &one;
        assert_abs_diff_eq!(out[0].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out[1].norm(), 0.0);
        let out = a.matrix() * s.vacuum();
        assert_eq!(out.norm(), 0.0);
    }

    #[test]
    fn annihilation_sqrt_rule() {
        let a = FockOperator::annihilation(space(4));
        assert_abs_diff_eq!(a.matrix()[(2, 3)].re, 1.732_050_8, epsilon = 1e-7);
    }

    #[test]
    fn commutator_truncation_edge() {
        let s = space(20);
        let a = FockOperator::annihilation(s);
        let c = a.commutator(&a.adjoint());
        for n in 0..19 {
            assert_abs_diff_eq!(c.matrix()[(n, n)].re, 1.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(c.matrix()[(19, 19)].re, -19.0, epsilon = 1e-12);
    }

    #[test]
    fn number_power_diag_examples() {
        let s = space(4);
        let id = FockOperator::number_power_diag(s, |_| 1.0);
        assert_eq!(id, FockOperator::identity(s));
        let p = FockOperator::number_power_diag(s, |n| if n % 2 == 0 { 1.0 } else { -1.0 });
        assert_eq!(p, FockOperator::parity(s));
        let r = FockOperator::number_power_diag(space(3), |n| 0.9_f64.powf(n as f64 / 2.0));
        assert_abs_diff_eq!(r.matrix()[(1, 1)].re, 0.948_683_3, epsilon = 1e-7);
        assert_abs_diff_eq!(r.matrix()[(2, 2)].re, 0.9, epsilon = 1e-15);
    }

    #[test]
    fn rotation_by_pi_is_parity() {
        let s = space(12);
        let r = FockOperator::rotation(s, core::f64::consts::PI);
        assert!(max_abs(&(r.matrix() - FockOperator::parity(s).matrix())) < 1e-12);
        assert!(FockOperator::unitary(s, r.into_matrix(), 12).is_ok());
    }

    #[test]
    fn coherent_examples() {
        let v = coherent_ket(space(10), Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(v, space(10).vacuum());

        let s = space(30);
        let v = coherent_ket(s, Complex64::new(1.0, 0.0)).unwrap();
        let n = FockOperator::number(s).ket_expectation(&v).unwrap();
        assert_abs_diff_eq!(n.re, 1.0, epsilon = 1e-10);

        let s = space(40);
        let p = coherent_ket(s, Complex64::new(2.0, 0.0)).unwrap();
        let m = coherent_ket(s, Complex64::new(-2.0, 0.0)).unwrap();
        let overlap = p.dotc(&m).norm_sqr();
        assert_abs_diff_eq!(overlap, (-16.0_f64).exp(), epsilon = 1e-15);
        assert!((overlap - 1.125e-7).abs() < 1e-9);
    }

    #[test]
    fn coherent_tail_rejected() {
        let err = coherent_ket(space(10), Complex64::new(3.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::TailTooLarge { .. }));
    }

    #[test]
    fn shift_operator_matches_dense() {
        let s = space(9);
        let a = FockOperator::annihilation(s);
        let lower = ShiftOperator::lowering(s, 2, |n| 0.5_f64.powi(n as i32));
        let dense = &FockOperator::number_power_diag(s, |n| 0.5_f64.powi(n as i32)) * &a.pow(2);
        assert!(max_abs(&(lower.to_operator().matrix() - dense.matrix())) < 1e-12);

        let raise = ShiftOperator::raising(s, 3, |n| 1.0 / (1.0 + n as f64));
        let dense_r = &a.adjoint().pow(3) * &FockOperator::number_power_diag(s, |n| 1.0 / (1.0 + n as f64));
        assert!(max_abs(&(raise.to_operator().matrix() - dense_r.matrix())) < 1e-12);

        let prod = raise.compose(&lower);
        let dense_p = dense_r.matrix() * dense.matrix();
        assert!(max_abs(&(prod.to_operator().matrix() - dense_p)) < 1e-12);
    }

    #[test]
    fn sandwich_matches_dense_with_aux_factor() {
        let s = space(6);
        let k = ShiftOperator::raising(s, 1, |n| 0.3 + n as f64 * 0.1).compose(&ShiftOperator::lowering(s, 2, |_| 0.7));
        let x = CMat::from_fn(12, 12, |i, j| {
            Complex64::new((i * 3 + j) as f64 * 0.01, (i as f64 - j as f64) * 0.02)
        });
        let full = tensor(k.to_operator().matrix(), &CMat::identity(2, 2));
        let expected = &full * &x * full.adjoint();
        let mut out = CMat::zeros(12, 12);
        k.sandwich_into(&x, 2, &mut out);
        assert!(max_abs(&(out - expected)) < 1e-14);
    }

    #[test]
    fn normal_ordering_identity() {
        // Σ_k λ^k/k! a†^k a^k = (1+λ)^{a†a}, exact on levels well inside the cutoff.
        let s = space(40);
        let a = FockOperator::annihilation(s);
        let ad = a.adjoint();
        for lambda in [0.1, 0.5] {
            let mut sum = CMat::zeros(40, 40);
            let mut ak = FockOperator::identity(s);
            let mut adk = FockOperator::identity(s);
            let mut coeff = 1.0;
            for k in 0..=40 {
                if k > 0 {
                    ak = &ak * &a;
                    adk = &adk * &ad;
                    coeff *= lambda / k as f64;
                }
                sum += (adk.matrix() * ak.matrix()) * Complex64::new(coeff, 0.0);
            }
            let target = FockOperator::rescaling(s, 1.0 + lambda);
            for n in 0..40 {
                let scale = target.matrix()[(n, n)].re;
                assert!((sum[(n, n)] - target.matrix()[(n, n)]).norm() / scale < 1e-10);
            }
        }
    }
}
