//! Noise channels as explicit Kraus lists.
//!
//! Bosonic noise is built from two primitives, pure loss of rate `μ`
//!
//! ```text
//! A_l = √(μ^l / l!) (1−μ)^{a†a/2} a^l
//! ```
//!
//! and the quantum-limited amplifier of gain `G`
//!
//! ```text
//! B_k = √((1−1/G)^k / (k! G)) a†^k G^{−a†a/2}.
//! ```
//!
//! Thermal noise of rate `η` and mean excitation `n̄` is the amplifier with
//! `G = 1 + η n̄` after a loss of rate `μ = 1 − (1−η)/G`; Gaussian displacement
//! noise uses `G = 1/η`, `μ = η`. The composed channel keeps the products
//! `B_k A_l` as its Kraus list.
//!
//! Truncation orders start at 12 and grow until the CPTP defect on the levels
//! left untouched by the truncation drops below `1e−8`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::fock::{max_abs, CMat, FockSpace, ShiftOperator};
use crate::hybrid::{HybridGate, HybridLayout, HybridState};
use crate::qubit::{self, sigma_x, sigma_y, sigma_z};
use crate::{Error, Result};

/// Starting Kraus truncation order for loss and gain.
pub const DEFAULT_ORDER: usize = 12;
/// Target CPTP defect for adaptive truncation.
pub const CPTP_TOL: f64 = 1e-8;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Which factor of a hybrid system a channel acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factor {
    /// The bosonic mode.
    Mode,
    /// One qubit of the register.
    Qubit(usize),
}

/// Amplifier gain and loss rate of an amplifier-after-loss decomposition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GainLoss {
    /// Amplifier gain `G ≥ 1`.
    pub gain: f64,
    /// Loss rate `μ ∈ [0, 1)`.
    pub loss: f64,
}

impl GainLoss {
    /// Validates `G ≥ 1` and `μ ∈ [0, 1)`.
    pub fn new(gain: f64, loss: f64) -> Result<Self> {
        if !(gain >= 1.0) || !gain.is_finite() {
            return Err(Error::InvalidParameter(format!("gain {gain} must be >= 1")));
        }
        if !(0.0..1.0).contains(&loss) {
            return Err(Error::InvalidParameter(format!("loss rate {loss} must be in [0, 1)")));
        }
        Ok(Self { gain, loss })
    }
}

/// Thermal noise rate and mean excitation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermalParams {
    eta: f64,
    nbar: f64,
}

impl ThermalParams {
    /// `η ∈ [0, 1)`, `n̄ ≥ 0`.
    pub fn new(eta: f64, nbar: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&eta) {
            return Err(Error::InvalidParameter(format!("noise rate {eta} must be in [0, 1)")));
        }
        if !(nbar >= 0.0) || !nbar.is_finite() {
            return Err(Error::InvalidParameter(format!("mean excitation {nbar} must be >= 0")));
        }
        Ok(Self { eta, nbar })
    }

    /// Rate `η`.
    pub fn eta(self) -> f64 {
        self.eta
    }

    /// Mean excitation `n̄`.
    pub fn nbar(self) -> f64 {
        self.nbar
    }

    /// `G = 1 + η n̄`.
    pub fn gain(self) -> f64 {
        1.0 + self.eta * self.nbar
    }

    /// `μ = 1 − (1−η)/G`.
    pub fn loss_rate(self) -> f64 {
        1.0 - (1.0 - self.eta) / self.gain()
    }

    /// Amplifier/loss decomposition.
    pub fn gain_loss(self) -> GainLoss {
        GainLoss {
            gain: self.gain(),
            loss: self.loss_rate(),
        }
    }
}

/// Bosonic noise model selectable from the command line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BosonicNoise {
    /// Pure loss of rate `η`.
    Loss {
        /// Loss rate.
        eta: f64,
    },
    /// Thermal noise.
    Thermal {
        /// Noise rate.
        eta: f64,
        /// Mean excitation.
        nbar: f64,
    },
    /// Gaussian displacement noise, decomposed with `G = 1/η`, `μ = η`.
    Gdn {
        /// Noise rate.
        eta: f64,
    },
}

impl BosonicNoise {
    /// Noise rate `η`.
    pub fn eta(self) -> f64 {
        match self {
            Self::Loss { eta } | Self::Thermal { eta, .. } | Self::Gdn { eta } => eta,
        }
    }

    /// Mean excitation (zero for loss; undefined, reported as zero, for GDN).
    pub fn nbar(self) -> f64 {
        match self {
            Self::Thermal { nbar, .. } => nbar,
            _ => 0.0,
        }
    }

    /// Same model with a different rate.
    pub fn with_eta(self, eta: f64) -> Self {
        match self {
            Self::Loss { .. } => Self::Loss { eta },
            Self::Thermal { nbar, .. } => Self::Thermal { eta, nbar },
            Self::Gdn { .. } => Self::Gdn { eta },
        }
    }

    /// Thermal parameters when the model is loss or thermal noise.
    pub fn thermal(self) -> Option<ThermalParams> {
        match self {
            Self::Loss { eta } => ThermalParams::new(eta, 0.0).ok(),
            Self::Thermal { eta, nbar } => ThermalParams::new(eta, nbar).ok(),
            Self::Gdn { .. } => None,
        }
    }

    /// Amplifier/loss decomposition.
    pub fn gain_loss(self) -> Result<GainLoss> {
        match self {
            Self::Loss { eta } => Ok(ThermalParams::new(eta, 0.0)?.gain_loss()),
            Self::Thermal { eta, nbar } => Ok(ThermalParams::new(eta, nbar)?.gain_loss()),
            Self::Gdn { eta } => {
                if !(eta > 0.0 && eta < 1.0) {
                    return Err(Error::InvalidParameter(format!("GDN rate {eta} must be in (0, 1)")));
                }
                GainLoss::new(1.0 / eta, eta)
            }
        }
    }

    /// Kraus channel with adaptive truncation.
    pub fn channel(self, space: FockSpace) -> Result<KrausChannel> {
        let gl = self.gain_loss()?;
        amp_loss_channel(gl, space)
    }
}

/// Kraus terms of a channel.
#[derive(Clone, Debug, PartialEq)]
pub enum KrausTerms {
    /// Shift-structured operators on the mode.
    Mode(Vec<ShiftOperator>),
    /// Single-qubit operators.
    Qubit(Vec<CMat>),
}

/// Channel in operator-sum form with its truncation metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    terms: KrausTerms,
    loss_order: usize,
    gain_order: usize,
    cptp_defect: f64,
}

impl KrausChannel {
    fn mode(space: FockSpace, terms: Vec<ShiftOperator>, loss_order: usize, gain_order: usize) -> Self {
        let terms: Vec<_> = terms.into_iter().filter(|t| !t.is_zero()).collect();
        let levels = space.cutoff().saturating_sub(loss_order + gain_order).max(1);
        let mut gram = vec![0.0; space.cutoff()];
        for t in &terms {
            for (g, w) in gram.iter_mut().zip(t.gram_diagonal()) {
                *g += w;
            }
        }
        let cptp_defect = gram[..levels].iter().map(|g| (g - 1.0).abs()).fold(0.0, f64::max);
        Self {
            terms: KrausTerms::Mode(terms),
            loss_order,
            gain_order,
            cptp_defect,
        }
    }

    fn qubit(terms: Vec<CMat>) -> Self {
        let terms: Vec<_> = terms.into_iter().filter(|t| max_abs(t) > 0.0).collect();
        let mut sum = CMat::zeros(2, 2);
        for t in &terms {
            sum += t.adjoint() * t;
        }
        let cptp_defect = max_abs(&(sum - CMat::identity(2, 2)));
        Self {
            terms: KrausTerms::Qubit(terms),
            loss_order: 0,
            gain_order: 0,
            cptp_defect,
        }
    }

    /// Identity channel on the mode.
    pub fn mode_identity(space: FockSpace) -> Self {
        Self::mode(space, vec![ShiftOperator::new(space, 0, |_| 1.0)], 0, 0)
    }

    /// Identity channel on a qubit.
    pub fn qubit_identity() -> Self {
        Self::qubit(vec![CMat::identity(2, 2)])
    }

    /// Kraus terms.
    pub fn terms(&self) -> &KrausTerms {
        &self.terms
    }

    /// Number of Kraus terms.
    pub fn len(&self) -> usize {
        match &self.terms {
            KrausTerms::Mode(t) => t.len(),
            KrausTerms::Qubit(t) => t.len(),
        }
    }

    /// True for an empty list.
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Loss truncation order `l_max`.
    pub fn loss_order(&self) -> usize {
        self.loss_order
    }

    /// Gain truncation order `k_max`.
    pub fn gain_order(&self) -> usize {
        self.gain_order
    }

    /// `‖Σ K†K − 1‖` on Fock levels `n < N − l_max − k_max` (full space for qubits).
    pub fn cptp_defect(&self) -> f64 {
        self.cptp_defect
    }

    /// `‖Σ K†K − 1‖` on Fock levels `0..levels`.
    pub fn cptp_defect_on(&self, levels: usize) -> f64 {
        match &self.terms {
            KrausTerms::Qubit(_) => self.cptp_defect,
            KrausTerms::Mode(terms) => {
                let Some(first) = terms.first() else { return 1.0 };
                let n = first.space().cutoff();
                let mut gram = vec![0.0; n];
                for t in terms {
                    for (g, w) in gram.iter_mut().zip(t.gram_diagonal()) {
                        *g += w;
                    }
                }
                gram[..levels.min(n)]
                    .iter()
                    .map(|g| (g - 1.0).abs())
                    .fold(0.0, f64::max)
            }
        }
    }

    /// Sequential composition `next ∘ self` on the same factor.
    pub fn then(&self, next: &Self) -> Result<Self> {
        match (&self.terms, &next.terms) {
            (KrausTerms::Mode(a), KrausTerms::Mode(b)) => {
                let space = a
                    .first()
                    .or(b.first())
                    .map(|t| t.space())
                    .ok_or(Error::InvalidParameter("empty channel".into()))?;
                let mut terms = Vec::with_capacity(a.len() * b.len());
                for y in b {
                    for x in a {
                        terms.push(y.compose(x));
                    }
                }
                Ok(Self::mode(
                    space,
                    terms,
                    self.loss_order + next.loss_order,
                    self.gain_order + next.gain_order,
                ))
            }
            (KrausTerms::Qubit(a), KrausTerms::Qubit(b)) => {
                let mut terms = Vec::with_capacity(a.len() * b.len());
                for y in b {
                    for x in a {
                        terms.push(y * x);
                    }
                }
                Ok(Self::qubit(terms))
            }
            _ => Err(Error::InvalidParameter("cannot compose mode and qubit channels".into())),
        }
    }

    /// Applies the channel to an arbitrary operator `X` on `layout`, acting on
    /// `factor` and as the identity elsewhere.
    pub fn apply_to(&self, x: &CMat, layout: HybridLayout, factor: Factor) -> Result<CMat> {
        layout.check(x)?;
        match (&self.terms, factor) {
            (KrausTerms::Mode(terms), Factor::Mode) => {
                if let Some(t) = terms.first() {
                    if t.space() != layout.space() {
                        return Err(Error::DimensionMismatch {
                            expected: layout.space().cutoff(),
                            found: t.space().cutoff(),
                        });
                    }
                }
                let mut out = CMat::zeros(x.nrows(), x.ncols());
                for t in terms {
                    t.sandwich_into(x, layout.register_dim(), &mut out);
                }
                Ok(out)
            }
            (KrausTerms::Qubit(terms), Factor::Qubit(q)) => {
                layout.check_qubit(q)?;
                let mut out = CMat::zeros(x.nrows(), x.ncols());
                for t in terms {
                    out += HybridGate::qubit_gate(layout, q, t)?.conjugate(x)?;
                }
                Ok(out)
            }
            _ => Err(Error::InvalidParameter(
                "channel does not act on the selected factor".into(),
            )),
        }
    }

    /// Applies the channel to a state.
    pub fn apply(&self, state: &HybridState, factor: Factor) -> Result<HybridState> {
        let m = self.apply_to(state.matrix(), state.layout(), factor)?;
        HybridState::new(state.layout(), m)
    }

    /// Applies a single-qubit channel to a bare `2^q×2^q` register operator.
    pub fn apply_register(&self, x: &CMat, qubit: usize, qubits: usize) -> Result<CMat> {
        let KrausTerms::Qubit(terms) = &self.terms else {
            return Err(Error::InvalidParameter("not a qubit channel".into()));
        };
        if qubit >= qubits || x.nrows() != 1 << qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << qubits,
                found: x.nrows(),
            });
        }
        let mut out = CMat::zeros(x.nrows(), x.ncols());
        for t in terms {
            let e = qubit::embed(t, qubit, qubits);
            out += &e * x * e.adjoint();
        }
        Ok(out)
    }
}

/// Pure loss `{A_l}` for `l = 0..=l_max`.
pub fn loss_channel(loss: f64, space: FockSpace, l_max: usize) -> Result<KrausChannel> {
    GainLoss::new(1.0, loss)?;
    let l_max = if loss == 0.0 { 0 } else { l_max };
    Ok(KrausChannel::mode(space, loss_terms(loss, space, l_max), l_max, 0))
}

/// Quantum-limited amplifier `{B_k}` for `k = 0..=k_max`.
pub fn amp_channel(gain: f64, space: FockSpace, k_max: usize) -> Result<KrausChannel> {
    GainLoss::new(gain, 0.0)?;
    let k_max = if gain == 1.0 { 0 } else { k_max };
    Ok(KrausChannel::mode(space, gain_terms(gain, space, k_max), 0, k_max))
}

fn loss_terms(mu: f64, space: FockSpace, l_max: usize) -> Vec<ShiftOperator> {
    let l_max = if mu == 0.0 { 0 } else { l_max };
    let damp = (1.0 - mu).sqrt();
    let mut coeff = 1.0;
    (0..=l_max)
        .map(|l| {
            if l > 0 {
                coeff *= mu / l as f64;
            }
            let c = coeff.sqrt();
            ShiftOperator::lowering(space, l, move |n| c * crate::fock::powi(damp, n))
        })
        .collect()
}

fn gain_terms(gain: f64, space: FockSpace, k_max: usize) -> Vec<ShiftOperator> {
    let z = 1.0 - 1.0 / gain;
    let k_max = if z == 0.0 { 0 } else { k_max };
    let damp = gain.powf(-0.5);
    let mut coeff = 1.0 / gain;
    (0..=k_max)
        .map(|k| {
            if k > 0 {
                coeff *= z / k as f64;
            }
            let c = coeff.sqrt();
            ShiftOperator::raising(space, k, move |n| c * crate::fock::powi(damp, n))
        })
        .collect()
}

/// Amplifier after loss with fixed truncation orders.
pub fn amp_loss_channel_with_orders(gl: GainLoss, space: FockSpace, l_max: usize, k_max: usize) -> KrausChannel {
    let loss = loss_terms(gl.loss, space, l_max);
    let gain = gain_terms(gl.gain, space, k_max);
    let mut terms = Vec::with_capacity(loss.len() * gain.len());
    for b in &gain {
        for a in &loss {
            terms.push(b.compose(a));
        }
    }
    let l = if gl.loss == 0.0 { 0 } else { l_max };
    let k = if gl.gain == 1.0 { 0 } else { k_max };
    KrausChannel::mode(space, terms, l, k)
}

/// Amplifier after loss with adaptive truncation: orders start at 12 and grow
/// until the CPTP defect is below `1e−8` or the orders exhaust the cutoff.
pub fn amp_loss_channel(gl: GainLoss, space: FockSpace) -> Result<KrausChannel> {
    let gl = GainLoss::new(gl.gain, gl.loss)?;
    let n = space.cutoff();
    let mut order = DEFAULT_ORDER.min(n / 2);
    loop {
        let ch = amp_loss_channel_with_orders(gl, space, order, order);
        if ch.cptp_defect() < CPTP_TOL || ch.loss_order() + ch.gain_order() + 2 >= n {
            if ch.cptp_defect() >= CPTP_TOL {
                log::warn!(
                    "Kraus truncation leaves CPTP defect {:.2e} at cutoff {n}",
                    ch.cptp_defect()
                );
            }
            return Ok(ch);
        }
        order += 2;
    }
}

/// Thermal noise channel.
pub fn thermal_channel(eta: f64, nbar: f64, space: FockSpace) -> Result<KrausChannel> {
    amp_loss_channel(ThermalParams::new(eta, nbar)?.gain_loss(), space)
}

/// Gaussian displacement noise channel.
pub fn gdn_channel(eta: f64, space: FockSpace) -> Result<KrausChannel> {
    BosonicNoise::Gdn { eta }.channel(space)
}

/// Qubit damping flavour.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DampingKind {
    /// `{K_0, √p |0⟩⟨1|}`.
    Amplitude,
    /// `{K_0, √p |1⟩⟨1|}`.
    Phase,
    /// Phase damping after amplitude damping of equal strength.
    Composite,
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("strength {p} must be in [0, 1]")));
    }
    Ok(())
}

fn damping_k0(p: f64) -> CMat {
    let mut k0 = CMat::zeros(2, 2);
    k0[(0, 0)] = Complex64::new(1.0, 0.0);
    k0[(1, 1)] = Complex64::new((1.0 - p).sqrt(), 0.0);
    k0
}

/// Amplitude, phase or composite qubit damping of strength `p`.
pub fn qubit_damping(p: f64, kind: DampingKind) -> Result<KrausChannel> {
    check_probability(p)?;
    let sp = Complex64::new(p.sqrt(), 0.0);
    let mut amp = CMat::zeros(2, 2);
    amp[(0, 1)] = sp;
    let mut ph = CMat::zeros(2, 2);
    ph[(1, 1)] = sp;
    match kind {
        DampingKind::Amplitude => Ok(KrausChannel::qubit(vec![damping_k0(p), amp])),
        DampingKind::Phase => Ok(KrausChannel::qubit(vec![damping_k0(p), ph])),
        DampingKind::Composite => {
            let a = qubit_damping(p, DampingKind::Amplitude)?;
            let b = qubit_damping(p, DampingKind::Phase)?;
            a.then(&b)
        }
    }
}

/// Qubit depolarizing `(1−η')ρ + (η'/3) Σ_j σ_j ρ σ_j`.
pub fn depolarizing(strength: f64) -> Result<KrausChannel> {
    check_probability(strength)?;
    let s = Complex64::new((strength / 3.0).sqrt(), 0.0);
    Ok(KrausChannel::qubit(vec![
        CMat::identity(2, 2) * Complex64::new((1.0 - strength).sqrt(), 0.0),
        sigma_x() * s,
        sigma_y() * s,
        sigma_z() * s,
    ]))
}

/// Composite damping written in the Pauli basis,
/// `¼{c₊ρ + c₋σ₃ρσ₃ + p[σ₁ρσ₁ + σ₂ρσ₂ + {ρ,σ₃} + i(σ₂ρσ₁ − σ₁ρσ₂)]}`.
pub fn composite_damping_pauli_form(p: f64, rho: &CMat) -> CMat {
    let r = (1.0 - p).sqrt();
    let c_plus = (1.0 + r) * (1.0 - p / 2.0 + r) + (1.0 - r) * (1.0 - p / 2.0 - r);
    let c_minus = (1.0 + r) * (1.0 - p / 2.0 - r) + (1.0 - r) * (1.0 - p / 2.0 + r);
    let (s1, s2, s3) = (sigma_x(), sigma_y(), sigma_z());
    let bracket = &s1 * rho * &s1 + &s2 * rho * &s2 + (rho * &s3 + &s3 * rho) + (&s2 * rho * &s1 - &s1 * rho * &s2) * I;
    (rho * Complex64::new(c_plus, 0.0)
        + &s3 * rho * &s3 * Complex64::new(c_minus, 0.0)
        + bracket * Complex64::new(p, 0.0))
        * Complex64::new(0.25, 0.0)
}

/// Bell pair `|Φ+⟩` after independent composite damping of strength `p` on
/// both qubits.
pub fn noisy_bell(p: f64) -> Result<CMat> {
    check_probability(p)?;
    let q = 1.0 - p;
    let mut m = CMat::zeros(4, 4);
    m[(0, 0)] = Complex64::new((1.0 + p * p) / 2.0, 0.0);
    m[(3, 3)] = Complex64::new(q * q / 2.0, 0.0);
    m[(1, 1)] = Complex64::new(p * q / 2.0, 0.0);
    m[(2, 2)] = Complex64::new(p * q / 2.0, 0.0);
    m[(0, 3)] = Complex64::new(q * q / 2.0, 0.0);
    m[(3, 0)] = Complex64::new(q * q / 2.0, 0.0);
    Ok(m)
}

/// `|Φ+⟩⟨Φ+|`.
pub fn bell_phi_plus() -> CMat {
    let v = (qubit::register_ket(&[0, 0]) + qubit::register_ket(&[1, 1]))
        * Complex64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
    &v * v.adjoint()
}
