//! Mode-qubit composite systems.
//!
//! A [`HybridLayout`] is a truncated Fock space tensored with a small qubit
//! register, `C^N ⊗ (C^2)^{⊗q}`. Basis index `n·2^q + s` puts the Fock level
//! first and the register index `s` second, with qubit 0 the most significant
//! bit of `s`.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::fock::{max_abs, CMat, CVec, FockSpace};
use crate::qubit;
use crate::{Error, Result, HERMITIAN_TOL, POSITIVITY_TOL};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Shape of a mode ⊗ qubit-register system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HybridLayout {
    space: FockSpace,
    qubits: usize,
}

impl HybridLayout {
    /// Mode plus `qubits` qubits (at most 3).
    pub fn new(space: FockSpace, qubits: usize) -> Result<Self> {
        if qubits > 3 {
            return Err(Error::InvalidParameter(alloc::format!("{qubits} qubits not supported")));
        }
        Ok(Self { space, qubits })
    }

    /// Fock space of the mode.
    pub fn space(self) -> FockSpace {
        self.space
    }

    /// Number of qubits.
    pub fn qubits(self) -> usize {
        self.qubits
    }

    /// Register dimension `2^q`.
    pub fn register_dim(self) -> usize {
        1 << self.qubits
    }

    /// Total dimension `N·2^q`.
    pub fn dim(self) -> usize {
        self.space.cutoff() * self.register_dim()
    }

    fn with_qubits(self, qubits: usize) -> Self {
        Self {
            space: self.space,
            qubits,
        }
    }

    pub(crate) fn check(self, m: &CMat) -> Result<()> {
        let d = self.dim();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: m.nrows().max(m.ncols()),
            });
        }
        Ok(())
    }

    pub(crate) fn check_qubit(self, q: usize) -> Result<()> {
        if q >= self.qubits {
            return Err(Error::DimensionMismatch {
                expected: self.qubits,
                found: q + 1,
            });
        }
        Ok(())
    }
}

/// Density operator on a [`HybridLayout`]. The trace may be below one for
/// unnormalized heralded states.
#[derive(Clone, Debug, PartialEq)]
pub struct HybridState {
    layout: HybridLayout,
    matrix: CMat,
}

impl HybridState {
    /// Wraps a matrix after checking its shape and Hermiticity.
    pub fn new(layout: HybridLayout, matrix: CMat) -> Result<Self> {
        layout.check(&matrix)?;
        let defect = max_abs(&(&matrix - matrix.adjoint()));
        if defect > HERMITIAN_TOL * (1.0 + max_abs(&matrix)) {
            return Err(Error::NotPhysical {
                what: "hermiticity",
                defect,
            });
        }
        Ok(Self { layout, matrix })
    }

    /// `ρ_mode ⊗ σ_register`.
    pub fn product(space: FockSpace, mode: &CMat, register: &CMat) -> Result<Self> {
        space.check_square(mode)?;
        let qubits = register.nrows().trailing_zeros() as usize;
        if register.nrows() != 1 << qubits || register.ncols() != register.nrows() {
            return Err(Error::DimensionMismatch {
                expected: 1 << qubits,
                found: register.ncols(),
            });
        }
        Self::new(HybridLayout::new(space, qubits)?, mode.kronecker(register))
    }

    /// Layout.
    pub fn layout(&self) -> HybridLayout {
        self.layout
    }

    /// Matrix entries.
    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// Consumes the state.
    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    /// Real trace.
    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.matrix)
    }

    /// Verifies positivity within `1e−10`.
    pub fn check_positive(&self) -> Result<()> {
        let m = self.min_eigenvalue();
        if m < -POSITIVITY_TOL {
            return Err(Error::NotPhysical {
                what: "positivity",
                defect: -m,
            });
        }
        Ok(())
    }

    /// Traces out the listed qubits.
    pub fn partial_trace_qubits(&self, which: &[usize]) -> Result<Self> {
        let (layout, m) = partial_trace_qubits(self.layout, &self.matrix, which)?;
        Ok(Self { layout, matrix: m })
    }

    /// `⟨k|ρ|k⟩` over the listed qubits (unnormalized; trace = herald probability).
    pub fn project_qubits(&self, which: &[usize], ket: &CVec) -> Result<Self> {
        let (layout, m) = project_qubits(self.layout, &self.matrix, which, ket)?;
        Ok(Self { layout, matrix: m })
    }
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &CMat) -> f64 {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    h.symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

struct Split {
    kept: Vec<usize>,
    picked: Vec<usize>,
}

fn split_register(qubits: usize, which: &[usize]) -> Result<Split> {
    for (i, &w) in which.iter().enumerate() {
        if w >= qubits || which[..i].contains(&w) {
            return Err(Error::DimensionMismatch {
                expected: qubits,
                found: w + 1,
            });
        }
    }
    let keep: Vec<usize> = (0..qubits).filter(|q| !which.contains(q)).collect();
    let d = 1usize << qubits;
    let bit = |s: usize, q: usize| (s >> (qubits - 1 - q)) & 1;
    let mut kept = Vec::with_capacity(d);
    let mut picked = Vec::with_capacity(d);
    for s in 0..d {
        kept.push(keep.iter().fold(0, |acc, &q| (acc << 1) | bit(s, q)));
        picked.push(which.iter().fold(0, |acc, &q| (acc << 1) | bit(s, q)));
    }
    Ok(Split { kept, picked })
}

/// Partial trace over the listed qubits of an operator on `layout`.
pub fn partial_trace_qubits(layout: HybridLayout, x: &CMat, which: &[usize]) -> Result<(HybridLayout, CMat)> {
    layout.check(x)?;
    let split = split_register(layout.qubits, which)?;
    let out_layout = layout.with_qubits(layout.qubits - which.len());
    let (d, dk, n) = (layout.register_dim(), out_layout.register_dim(), layout.space.cutoff());
    let mut out = CMat::zeros(out_layout.dim(), out_layout.dim());
    for m in 0..n {
        for t in 0..d {
            for i in 0..n {
                for s in 0..d {
                    if split.picked[s] == split.picked[t] {
                        out[(i * dk + split.kept[s], m * dk + split.kept[t])] += x[(i * d + s, m * d + t)];
                    }
                }
            }
        }
    }
    Ok((out_layout, out))
}

/// `(1 ⊗ ⟨k|) X (1 ⊗ |k⟩)` for a ket `k` over the listed qubits (listed order,
/// first most significant). The result lives on the remaining qubits.
pub fn project_qubits(layout: HybridLayout, x: &CMat, which: &[usize], ket: &CVec) -> Result<(HybridLayout, CMat)> {
    layout.check(x)?;
    if ket.len() != 1 << which.len() {
        return Err(Error::DimensionMismatch {
            expected: 1 << which.len(),
            found: ket.len(),
        });
    }
    let split = split_register(layout.qubits, which)?;
    let out_layout = layout.with_qubits(layout.qubits - which.len());
    let (d, dk, n) = (layout.register_dim(), out_layout.register_dim(), layout.space.cutoff());
    let bra: Vec<Complex64> = (0..d).map(|s| ket[split.picked[s]].conj()).collect();
    let kk: Vec<Complex64> = (0..d).map(|s| ket[split.picked[s]]).collect();
    let mut out = CMat::zeros(out_layout.dim(), out_layout.dim());
    for m in 0..n {
        for t in 0..d {
            if kk[t] == ZERO {
                continue;
            }
            for i in 0..n {
                for s in 0..d {
                    if bra[s] == ZERO {
                        continue;
                    }
                    out[(i * dk + split.kept[s], m * dk + split.kept[t])] += bra[s] * x[(i * d + s, m * d + t)] * kk[t];
                }
            }
        }
    }
    Ok((out_layout, out))
}

/// Unitary on a [`HybridLayout`].
///
/// Conditional rotations commute with `a†a`, so they are stored as one
/// register-sized block per Fock level and conjugate in `O(N²·4^q)`.
#[derive(Clone, Debug, PartialEq)]
pub enum HybridGate {
    /// `Σ_n |n⟩⟨n| ⊗ B_n`.
    FockDiagonal {
        /// Layout the gate acts on.
        layout: HybridLayout,
        /// Register block per Fock level.
        blocks: Vec<CMat>,
    },
    /// Arbitrary dense matrix.
    Dense {
        /// Layout the gate acts on.
        layout: HybridLayout,
        /// Full matrix.
        matrix: CMat,
    },
}

impl HybridGate {
    /// Identity.
    pub fn identity(layout: HybridLayout) -> Self {
        Self::register(layout, &CMat::identity(layout.register_dim(), layout.register_dim()))
    }

    /// Conditional rotation `exp(i θ a†a n̂·σ_q)` between the mode and `qubit`.
    pub fn conditional_rotation(layout: HybridLayout, qubit: usize, theta: f64, axis: qubit::Axis) -> Result<Self> {
        layout.check_qubit(qubit)?;
        let blocks = (0..layout.space.cutoff())
            .map(|n| qubit::embed(&axis.rotation(theta * n as f64), qubit, layout.qubits))
            .collect();
        Ok(Self::FockDiagonal { layout, blocks })
    }

    /// Local mode rotation `exp(i θ a†a) ⊗ 1`.
    pub fn mode_rotation(layout: HybridLayout, theta: f64) -> Self {
        let d = layout.register_dim();
        let blocks = (0..layout.space.cutoff())
            .map(|n| CMat::identity(d, d) * Complex64::from_polar(1.0, theta * n as f64))
            .collect();
        Self::FockDiagonal { layout, blocks }
    }

    /// `1 ⊗ U` on the whole register.
    pub fn register(layout: HybridLayout, u: &CMat) -> Self {
        Self::FockDiagonal {
            layout,
            blocks: (0..layout.space.cutoff()).map(|_| u.clone()).collect(),
        }
    }

    /// One-qubit gate on `qubit`.
    pub fn qubit_gate(layout: HybridLayout, qubit: usize, u: &CMat) -> Result<Self> {
        layout.check_qubit(qubit)?;
        Ok(Self::register(layout, &qubit::embed(u, qubit, layout.qubits)))
    }

    /// `U_0 ⊗ |0⟩⟨0|_q + U_1 ⊗ |1⟩⟨1|_q` for mode unitaries `U_0`, `U_1`.
    pub fn controlled_mode(layout: HybridLayout, qubit: usize, if_zero: &CMat, if_one: &CMat) -> Result<Self> {
        layout.check_qubit(qubit)?;
        layout.space.check_square(if_zero)?;
        layout.space.check_square(if_one)?;
        let p0 = qubit::embed(&(qubit::ket(0) * qubit::ket(0).adjoint()), qubit, layout.qubits);
        let p1 = qubit::embed(&(qubit::ket(1) * qubit::ket(1).adjoint()), qubit, layout.qubits);
        let matrix = if_zero.kronecker(&p0) + if_one.kronecker(&p1);
        Ok(Self::Dense { layout, matrix })
    }

    /// Wraps a dense matrix.
    pub fn dense(layout: HybridLayout, matrix: CMat) -> Result<Self> {
        layout.check(&matrix)?;
        Ok(Self::Dense { layout, matrix })
    }

    /// Layout.
    pub fn layout(&self) -> HybridLayout {
        match self {
            Self::FockDiagonal { layout, .. } | Self::Dense { layout, .. } => *layout,
        }
    }

    /// Dense matrix.
    pub fn to_dense(&self) -> CMat {
        match self {
            Self::Dense { matrix, .. } => matrix.clone(),
            Self::FockDiagonal { layout, blocks } => {
                let d = layout.register_dim();
                let mut m = CMat::zeros(layout.dim(), layout.dim());
                for (n, b) in blocks.iter().enumerate() {
                    m.view_mut((n * d, n * d), (d, d)).copy_from(b);
                }
                m
            }
        }
    }

    /// Hermitian adjoint.
    pub fn adjoint(&self) -> Self {
        match self {
            Self::Dense { layout, matrix } => Self::Dense {
                layout: *layout,
                matrix: matrix.adjoint(),
            },
            Self::FockDiagonal { layout, blocks } => Self::FockDiagonal {
                layout: *layout,
                blocks: blocks.iter().map(|b| b.adjoint()).collect(),
            },
        }
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &Self) -> Self {
        match (self, next) {
            (Self::FockDiagonal { layout, blocks: a }, Self::FockDiagonal { blocks: b, .. }) => Self::FockDiagonal {
                layout: *layout,
                blocks: a.iter().zip(b).map(|(x, y)| y * x).collect(),
            },
            _ => Self::Dense {
                layout: self.layout(),
                matrix: next.to_dense() * self.to_dense(),
            },
        }
    }

    /// `U X U†` for an arbitrary (not necessarily Hermitian) operator `X`.
    pub fn conjugate(&self, x: &CMat) -> Result<CMat> {
        let layout = self.layout();
        layout.check(x)?;
        match self {
            Self::Dense { matrix, .. } => Ok(matrix * x * matrix.adjoint()),
            Self::FockDiagonal { blocks, .. } => {
                let d = layout.register_dim();
                let n = layout.space.cutoff();
                let daggers: Vec<CMat> = blocks.iter().map(|b| b.adjoint()).collect();
                let mut out = CMat::zeros(x.nrows(), x.ncols());
                let mut tmp = CMat::zeros(d, d);
                for (j, dag) in daggers.iter().enumerate().take(n) {
                    for (i, block) in blocks.iter().enumerate().take(n) {
                        let xb = x.view((i * d, j * d), (d, d));
                        block.mul_to(&xb, &mut tmp);
                        let mut ob = out.view_mut((i * d, j * d), (d, d));
                        tmp.mul_to(dag, &mut ob);
                    }
                }
                Ok(out)
            }
        }
    }

    /// `U |ψ⟩`.
    pub fn apply_ket(&self, ket: &CVec) -> Result<CVec> {
        let layout = self.layout();
        if ket.len() != layout.dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                found: ket.len(),
            });
        }
        match self {
            Self::Dense { matrix, .. } => Ok(matrix * ket),
            Self::FockDiagonal { blocks, .. } => {
                let d = layout.register_dim();
                let mut out = CVec::zeros(ket.len());
                for (n, b) in blocks.iter().enumerate() {
                    let seg = b * ket.rows(n * d, d);
                    out.rows_mut(n * d, d).copy_from(&seg);
                }
                Ok(out)
            }
        }
    }

    /// `‖U†U − 1‖_max` over the whole space.
    pub fn unitarity_defect(&self) -> f64 {
        match self {
            Self::Dense { matrix, .. } => {
                let d = matrix.nrows();
                max_abs(&(matrix.adjoint() * matrix - CMat::identity(d, d)))
            }
            Self::FockDiagonal { blocks, .. } => blocks
                .iter()
                .map(|b| max_abs(&(b.adjoint() * b - CMat::identity(b.nrows(), b.nrows()))))
                .fold(0.0, f64::max),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{tensor, FockOperator};
    use crate::qubit::{ket, register_ket, Axis};
    use approx::assert_abs_diff_eq;

    fn layout(n: usize, q: usize) -> HybridLayout {
        HybridLayout::new(FockSpace::new(n).unwrap(), q).unwrap()
    }

    fn random_density(dim: usize, seed: u64) -> CMat {
        let mut state = seed;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let a = CMat::from_fn(dim, dim, |_, _| Complex64::new(next(), next()));
        let rho = &a * a.adjoint();
        let tr = rho.trace();
        rho / tr
    }

    #[test]
    fn projection_examples() {
        let s = FockSpace::new(6).unwrap();
        let rho_b = random_density(6, 3);
        let zero = ket(0) * ket(0).adjoint();
        let state = HybridState::product(s, &rho_b, &zero).unwrap();
        let p0 = state.project_qubits(&[0], &ket(0)).unwrap();
        assert!(max_abs(&(p0.matrix() - &rho_b)) < 1e-15);
        assert_abs_diff_eq!(p0.trace(), 1.0, epsilon = 1e-12);
        let p1 = state.project_qubits(&[0], &ket(1)).unwrap();
        assert_eq!(max_abs(p1.matrix()), 0.0);
    }

    #[test]
    fn partial_trace_of_correlated_state() {
        let s = FockSpace::new(2).unwrap();
        let mut psi = tensor(
            &CMat::from_column_slice(2, 1, s.ket(0).unwrap().as_slice()),
            &CMat::from_column_slice(2, 1, ket(0).as_slice()),
        );
        psi += tensor(
            &CMat::from_column_slice(2, 1, s.ket(1).unwrap().as_slice()),
            &CMat::from_column_slice(2, 1, ket(1).as_slice()),
        );
        psi *= Complex64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        let state = HybridState::new(layout(2, 1), &psi * psi.adjoint()).unwrap();
        let reduced = state.partial_trace_qubits(&[0]).unwrap();
        assert!(max_abs(&(reduced.matrix() - CMat::identity(2, 2) * Complex64::new(0.5, 0.0))) < 1e-15);
    }

    #[test]
    fn partial_trace_round_trip() {
        let s = FockSpace::new(5).unwrap();
        let rho = random_density(5, 11);
        let sigma = random_density(4, 12) * Complex64::new(0.7, 0.0);
        let state = HybridState::product(s, &rho, &sigma).unwrap();
        let reduced = state.partial_trace_qubits(&[0, 1]).unwrap();
        assert!(max_abs(&(reduced.matrix() - &rho * sigma.trace())) < 1e-14);
        // Tracing one qubit keeps the other's marginal.
        let one = state.partial_trace_qubits(&[1]).unwrap();
        assert_eq!(one.layout().qubits(), 1);
        assert_abs_diff_eq!(one.trace(), 0.7, epsilon = 1e-13);
    }

    #[test]
    fn projection_on_middle_qubit() {
        let s = FockSpace::new(3).unwrap();
        let rho = random_density(3, 5);
        let reg = register_ket(&[1, 0, 1]);
        let state = HybridState::product(s, &rho, &(&reg * reg.adjoint())).unwrap();
        let out = state.project_qubits(&[1], &ket(0)).unwrap();
        let expect = tensor(&rho, &(register_ket(&[1, 1]) * register_ket(&[1, 1]).adjoint()));
        assert!(max_abs(&(out.matrix() - expect)) < 1e-15);
    }

    #[test]
    fn dimension_errors() {
        let l = layout(4, 1);
        assert!(matches!(
            l.check(&CMat::zeros(4, 4)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(HybridGate::conditional_rotation(l, 1, 0.1, Axis::X).is_err());
    }

    #[test]
    fn fock_diagonal_conjugation_matches_dense() {
        let l = layout(7, 2);
        let g = HybridGate::conditional_rotation(l, 1, 0.4, Axis::new([0.0, 0.6, 0.8]).unwrap()).unwrap();
        let x = CMat::from_fn(28, 28, |i, j| {
            Complex64::new((i as f64 * 0.3).sin(), (j as f64 * 0.7).cos())
        });
        let dense = g.to_dense();
        let expect = &dense * &x * dense.adjoint();
        assert!(max_abs(&(g.conjugate(&x).unwrap() - expect)) < 1e-13);
        assert!(g.unitarity_defect() < 1e-13);
        let v = CVec::from_fn(28, |i, _| Complex64::new(i as f64, 1.0));
        assert!((g.apply_ket(&v).unwrap() - &dense * &v).norm() < 1e-12);
    }

    #[test]
    fn conditional_rotation_structure() {
        // exp(iθ a†a n̂·σ) = cos(θ a†a) ⊗ 1 + i sin(θ a†a) ⊗ n̂·σ.
        let l = layout(8, 1);
        let s = l.space();
        let theta = 0.9;
        let g = HybridGate::conditional_rotation(l, 0, theta, Axis::X)
            .unwrap()
            .to_dense();
        let c = FockOperator::number_power_diag(s, |n| (theta * n as f64).cos());
        let sn = FockOperator::number_power_diag(s, |n| (theta * n as f64).sin());
        let expect = tensor(c.matrix(), &CMat::identity(2, 2))
            + tensor(sn.matrix(), &crate::qubit::sigma_x()) * Complex64::new(0.0, 1.0);
        assert!(max_abs(&(g - expect)) < 1e-14);
    }

    #[test]
    fn min_eigenvalue_detects_negativity() {
        let s = FockSpace::new(2).unwrap();
        let bad = CMat::from_diagonal(&CVec::from_vec(alloc::vec![
            Complex64::new(1.1, 0.0),
            Complex64::new(-0.1, 0.0)
        ]));
        let st = HybridState::new(HybridLayout::new(s, 0).unwrap(), bad).unwrap();
        assert!(st.check_positive().is_err());
    }
}
