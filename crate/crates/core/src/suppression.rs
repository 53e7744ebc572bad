//! Single-ancilla conditional-Fourier interferometer.
//!
//! The mode is entangled with one ancilla qubit by `U_s = exp(i ϑ a†a n̂·σ)`,
//! exposed to noise, disentangled by `U_s†` and kept only if the ancilla is
//! found in its initial state. At `ϑ = π/2` with `n̂ ⊥ ẑ` every noise event
//! that changes the photon number by an odd amount is rejected.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::channels::{
    depolarizing, loss_channel, qubit_damping, DampingKind, Factor, GainLoss, KrausChannel, ThermalParams,
};
use crate::codes::{BosonicCode, Parity};
use crate::fidelity::{HeraldedMap, LogicalProcess, MIN_SUCCESS};
use crate::fock::{coherent_ket, max_abs, trace_product, CMat, CVec, FockOperator, FockSpace, ShiftOperator};
use crate::hybrid::{project_qubits, HybridGate, HybridLayout};
use crate::qubit::{self, Axis};
use crate::{Error, Result};

/// Interferometer layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Variant {
    /// `U_s` before and `U_s†` after the noise.
    #[default]
    TwoCf,
    /// Local mode rotation `e^{iϑ a†a}` in place of the first hybrid gate;
    /// only valid for like-parity inputs.
    LocalRotationPlusOneCf,
}

/// Noise on the ancilla qubit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QubitNoise {
    /// Composite amplitude and phase damping of strength `p`.
    Damping(f64),
    /// Depolarizing noise of strength `η'`.
    Depolarizing(f64),
}

impl QubitNoise {
    /// Kraus channel.
    pub fn channel(self) -> Result<KrausChannel> {
        match self {
            Self::Damping(p) => qubit_damping(p, DampingKind::Composite),
            Self::Depolarizing(e) => depolarizing(e),
        }
    }

    /// Strength parameter.
    pub fn strength(self) -> f64 {
        match self {
            Self::Damping(p) | Self::Depolarizing(p) => p,
        }
    }
}

/// Extra noise after every conditional gate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateNoise {
    /// Mode loss rate per gate.
    pub cv_loss: f64,
    /// Composite damping strength on the ancilla per gate.
    pub dv_damp: f64,
}

impl GateNoise {
    /// 1% loss and 1% composite damping per gate.
    pub const ONE_PERCENT: Self = Self {
        cv_loss: 0.01,
        dv_damp: 0.01,
    };
}

/// Interferometer settings.
#[derive(Clone, Debug, PartialEq)]
pub struct SuppressionConfig {
    /// Rotation angle `ϑ`.
    pub theta: f64,
    /// Rotation axis `n̂`.
    pub axis: Axis,
    /// Initial (and heralded) ancilla ket.
    pub ancilla: CVec,
    /// Interferometer layout.
    pub variant: Variant,
    /// Ancilla noise applied together with the mode noise.
    pub dv_noise: Option<QubitNoise>,
    /// Noise after each conditional gate.
    pub gate_noise: Option<GateNoise>,
}

impl Default for SuppressionConfig {
    fn default() -> Self {
        Self {
            theta: FRAC_PI_2,
            axis: Axis::X,
            ancilla: qubit::ket(0),
            variant: Variant::TwoCf,
            dv_noise: None,
            gate_noise: None,
        }
    }
}

impl SuppressionConfig {
    /// CF settings for a code: ancilla `|0⟩`, or `n̂·σ|0⟩` for like-odd codes.
    pub fn for_code(code: &BosonicCode) -> Self {
        let mut c = Self::default();
        if code.parity() == Parity::LikeOdd {
            c.ancilla = c.axis.pauli() * qubit::ket(0);
        }
        c
    }

    /// Sets the ancilla noise.
    pub fn with_dv_noise(mut self, noise: Option<QubitNoise>) -> Self {
        self.dv_noise = noise;
        self
    }

    /// Sets the per-gate noise.
    pub fn with_gate_noise(mut self, noise: Option<GateNoise>) -> Self {
        self.gate_noise = noise;
        self
    }

    /// Sets the layout.
    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    /// Checks the ancilla ket and, at `ϑ = π/2`, that `n̂ ⊥ ẑ`.
    pub fn validate(&self) -> Result<()> {
        if self.ancilla.len() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: self.ancilla.len(),
            });
        }
        if (self.ancilla.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter("ancilla ket must be normalized".into()));
        }
        if (self.theta - FRAC_PI_2).abs() < 1e-12 && self.axis.dot(Axis::Z).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "CF configuration needs an axis orthogonal to z, got {:?}",
                self.axis.components()
            )));
        }
        Ok(())
    }
}

/// `U_s = exp(i ϑ a†a n̂·σ)` on the mode and one qubit.
pub fn suppression_unitary(theta: f64, axis: Axis, space: FockSpace) -> Result<HybridGate> {
    HybridGate::conditional_rotation(HybridLayout::new(space, 1)?, 0, theta, axis)
}

/// Parity sector of a mode operator: `Some(true)` if it lives on even-even
/// levels, `Some(false)` on odd-odd levels, `None` otherwise.
fn operator_parity(x: &CMat) -> Option<bool> {
    let (mut even, mut odd, mut mixed) = (0.0_f64, 0.0_f64, 0.0_f64);
    for j in 0..x.ncols() {
        for i in 0..x.nrows() {
            let v = x[(i, j)].norm();
            match (i % 2, j % 2) {
                (0, 0) => even = even.max(v),
                (1, 1) => odd = odd.max(v),
                _ => mixed = mixed.max(v),
            }
        }
    }
    let scale = even.max(odd).max(mixed);
    let tol = 1e-10 * scale.max(f64::MIN_POSITIVE);
    match (even > tol, odd > tol, mixed > tol) {
        (_, false, false) => Some(true),
        (false, true, false) => Some(false),
        _ => None,
    }
}

/// Heralded single-ancilla protocol with fixed noise.
#[derive(Clone, Debug)]
pub struct SuppressionProtocol {
    layout: HybridLayout,
    config: SuppressionConfig,
    u: HybridGate,
    u_dag: HybridGate,
    cv_noise: KrausChannel,
    dv_noise: Option<KrausChannel>,
    gate_cv: Option<KrausChannel>,
    gate_dv: Option<KrausChannel>,
}

impl SuppressionProtocol {
    /// Builds the protocol for a mode channel and settings.
    pub fn new(space: FockSpace, cv_noise: KrausChannel, config: SuppressionConfig) -> Result<Self> {
        config.validate()?;
        let layout = HybridLayout::new(space, 1)?;
        let u = suppression_unitary(config.theta, config.axis, space)?;
        let u_dag = u.adjoint();
        let dv_noise = config.dv_noise.map(QubitNoise::channel).transpose()?;
        let (gate_cv, gate_dv) = match config.gate_noise {
            Some(g) => (
                Some(loss_channel(g.cv_loss, space, crate::channels::DEFAULT_ORDER)?),
                Some(qubit_damping(g.dv_damp, DampingKind::Composite)?),
            ),
            None => (None, None),
        };
        Ok(Self {
            layout,
            config,
            u,
            u_dag,
            cv_noise,
            dv_noise,
            gate_cv,
            gate_dv,
        })
    }

    /// Settings.
    pub fn config(&self) -> &SuppressionConfig {
        &self.config
    }

    fn gate_noise(&self, y: CMat) -> Result<CMat> {
        let mut y = y;
        if let Some(ch) = &self.gate_cv {
            y = ch.apply_to(&y, self.layout, Factor::Mode)?;
        }
        if let Some(ch) = &self.gate_dv {
            y = ch.apply_to(&y, self.layout, Factor::Qubit(0))?;
        }
        Ok(y)
    }

    /// Hybrid operator after the first gate (and its gate noise).
    fn encode(&self, x: &CMat) -> Result<CMat> {
        let space = self.layout.space();
        space.check_square(x)?;
        let a = &self.config.ancilla;
        match self.config.variant {
            Variant::TwoCf => {
                let y = x.kronecker(&(a * a.adjoint()));
                self.gate_noise(self.u.conjugate(&y)?)
            }
            Variant::LocalRotationPlusOneCf => {
                let even = operator_parity(x).ok_or(Error::VariantParityMismatch)?;
                // The hybrid gate would leave even inputs' ancilla alone and
                // flip odd inputs' ancilla by n̂·σ.
                let mid = if even { a.clone() } else { self.config.axis.pauli() * a };
                let r = FockOperator::rotation(space, self.config.theta).into_matrix();
                let rx = &r * x * r.adjoint();
                Ok(rx.kronecker(&(&mid * mid.adjoint())))
            }
        }
    }

    /// Hybrid operator just before the herald.
    pub fn hybrid_output(&self, x: &CMat) -> Result<CMat> {
        let mut y = self.encode(x)?;
        y = self.cv_noise.apply_to(&y, self.layout, Factor::Mode)?;
        if let Some(ch) = &self.dv_noise {
            y = ch.apply_to(&y, self.layout, Factor::Qubit(0))?;
        }
        y = self.u_dag.conjugate(&y)?;
        self.gate_noise(y)
    }
}

impl HeraldedMap for SuppressionProtocol {
    fn apply(&self, x: &CMat) -> Result<CMat> {
        let y = self.hybrid_output(x)?;
        Ok(project_qubits(self.layout, &y, &[0], &self.config.ancilla)?.1)
    }

    fn truncation_defect(&self) -> f64 {
        let mut d = self.cv_noise.cptp_defect();
        for ch in [&self.dv_noise, &self.gate_cv, &self.gate_dv].into_iter().flatten() {
            d = d.max(ch.cptp_defect());
        }
        d
    }
}

/// Mode channel alone, without any interferometer.
#[derive(Clone, Debug)]
pub struct Unsuppressed {
    layout: HybridLayout,
    cv_noise: KrausChannel,
}

impl Unsuppressed {
    /// Wraps a mode channel.
    pub fn new(space: FockSpace, cv_noise: KrausChannel) -> Result<Self> {
        Ok(Self {
            layout: HybridLayout::new(space, 0)?,
            cv_noise,
        })
    }
}

impl HeraldedMap for Unsuppressed {
    fn apply(&self, x: &CMat) -> Result<CMat> {
        self.cv_noise.apply_to(x, self.layout, Factor::Mode)
    }

    fn truncation_defect(&self) -> f64 {
        self.cv_noise.cptp_defect()
    }
}

/// Normalized heralded output and its probability.
#[derive(Clone, Debug, PartialEq)]
pub struct HeraldedOutput {
    /// Normalized output state.
    pub state: CMat,
    /// Herald probability.
    pub success: f64,
}

pub(crate) fn normalize(y: CMat) -> Result<HeraldedOutput> {
    let success = y.trace().re;
    if !(success > MIN_SUCCESS) {
        return Err(Error::ZeroSuccess);
    }
    Ok(HeraldedOutput {
        state: y / Complex64::new(success, 0.0),
        success,
    })
}

/// Runs the interferometer on a unit-trace mode state.
pub fn run_suppression(rho: &CMat, cv_noise: &KrausChannel, config: &SuppressionConfig) -> Result<HeraldedOutput> {
    let space = FockSpace::new(rho.nrows())?;
    let p = SuppressionProtocol::new(space, cv_noise.clone(), config.clone())?;
    normalize(p.apply(rho)?)
}

/// Heralded action `⟨a|U_s†(K ⊗ 1)U_s|a⟩` of a single mode Kraus operator.
pub fn suppressed_kraus(kraus: &ShiftOperator, config: &SuppressionConfig) -> Result<CMat> {
    config.validate()?;
    let space = kraus.space();
    let u = suppression_unitary(config.theta, config.axis, space)?.to_dense();
    let k = kraus.to_operator().into_matrix().kronecker(&CMat::identity(2, 2));
    let full = u.adjoint() * k * &u;
    let bra = CMat::identity(space.cutoff(), space.cutoff()).kronecker(&config.ancilla.adjoint());
    Ok(&bra * full * bra.adjoint())
}

/// Average fidelity and success of a code under a heralded map.
pub fn logical_process(code: &BosonicCode, map: &impl HeraldedMap) -> Result<LogicalProcess> {
    LogicalProcess::new(code, map)
}

/// `g(Y) = tr{C Y C Y†} + |tr{C Y}|²`.
pub fn g_function(c: &CMat, y: &CMat) -> f64 {
    let cy = c * y;
    trace_product(&cy, &(c * y.adjoint())).re + trace_product(c, y).norm_sqr()
}

/// Second-order average fidelity of the CF protocol under thermal noise.
pub fn closed_form_fidelity(code: &BosonicCode, thermal: ThermalParams) -> f64 {
    let (eta, nb) = (thermal.eta(), thermal.nbar());
    let s = code.space();
    let c = code.codespace_identity();
    let n = FockOperator::number(s).into_matrix();
    let a = FockOperator::annihilation(s).into_matrix();
    let a2 = &a * &a;
    let tn = code.number_trace(|k| k as f64);
    let tn2 = code.number_trace(|k| (k * k) as f64);
    let brace = nb * nb + 3.0 * (nb + 0.5).powi(2) * tn2 + (nb * nb - nb - 0.5) * tn
        - (1.0 / 6.0 + 4.0 / 3.0 * (nb * nb + nb)) * g_function(&c, &n)
        - (1.0 / 3.0 + 2.0 / 3.0 * (nb * nb + nb)) * g_function(&c, &a2);
    1.0 - eta * eta * brace
}

/// First-order average fidelity of the bare thermal channel.
pub fn closed_form_unsuppressed(code: &BosonicCode, thermal: ThermalParams) -> f64 {
    let (eta, nb) = (thermal.eta(), thermal.nbar());
    let s = code.space();
    let c = code.codespace_identity();
    let a = FockOperator::annihilation(s).into_matrix();
    let ad = a.adjoint();
    let ta = trace_product(&c, &a).norm_sqr();
    let tn = code.number_trace(|k| k as f64);
    let up = trace_product(&(&c * &ad), &(&c * &a)).re + ta;
    let down = trace_product(&(&c * &a), &(&c * &ad)).re + ta;
    1.0 - eta * (nb + (1.0 + 2.0 * nb) * tn - 2.0 * nb / 3.0 * up - 2.0 * (1.0 + nb) / 3.0 * down)
}

/// `tr{C_L f(a†a) x^{a†a}}` with `x = (1 − 2μG)/(2G − 1)`.
pub(crate) fn rescaled_trace(code: &BosonicCode, gl: GainLoss, f: impl Fn(usize) -> f64) -> f64 {
    let x = (1.0 - 2.0 * gl.loss * gl.gain) / (2.0 * gl.gain - 1.0);
    code.number_trace(|n| f(n) * crate::fock::powi(x, n))
}

/// Exact average success probability `½ + tr{C_L x^{a†a}} / (2(2G−1))`.
pub fn closed_form_success(code: &BosonicCode, gl: GainLoss) -> f64 {
    0.5 + rescaled_trace(code, gl, |_| 1.0) / (2.0 * (2.0 * gl.gain - 1.0))
}

/// Output of the hybrid-entangled protocol.
#[derive(Clone, Debug, PartialEq)]
pub struct HybridEntangledOutput {
    /// Normalized mode ⊗ data-qubit state.
    pub state: CMat,
    /// Herald probability.
    pub success: f64,
    /// Fidelity with the input hybrid ket.
    pub fidelity: f64,
}

/// `(|α⟩|0⟩ + sign·|β⟩|1⟩)/𝒩` on the mode and a data qubit.
pub fn hybrid_entangled_ket(alpha: Complex64, beta: Complex64, sign: f64, space: FockSpace) -> Result<CVec> {
    let a = coherent_ket(space, alpha)?;
    let b = coherent_ket(space, beta)?;
    let v = a.kronecker(&qubit::ket(0)) + b.kronecker(&qubit::ket(1)) * Complex64::new(sign.signum(), 0.0);
    let norm = v.norm();
    Ok(v / Complex64::new(norm, 0.0))
}

/// Protects the mode of a hybrid entangled state with one extra ancilla
/// qubit. The data qubit is register qubit 0 and the ancilla qubit 1.
pub fn hybrid_entangled_suppression(
    alpha: Complex64,
    beta: Complex64,
    sign: f64,
    cv_noise: &KrausChannel,
    config: &SuppressionConfig,
) -> Result<HybridEntangledOutput> {
    config.validate()?;
    let space = match cv_noise.terms() {
        crate::channels::KrausTerms::Mode(t) => t
            .first()
            .map(|k| k.space())
            .ok_or(Error::InvalidParameter("empty channel".into()))?,
        crate::channels::KrausTerms::Qubit(_) => return Err(Error::InvalidParameter("mode channel expected".into())),
    };
    let psi = hybrid_entangled_ket(alpha, beta, sign, space)?;
    let layout = HybridLayout::new(space, 2)?;
    let full = psi.kronecker(&config.ancilla);
    let u = HybridGate::conditional_rotation(layout, 1, config.theta, config.axis)?;
    let mut y = u.conjugate(&(&full * full.adjoint()))?;
    y = cv_noise.apply_to(&y, layout, Factor::Mode)?;
    if let Some(n) = config.dv_noise {
        y = n.channel()?.apply_to(&y, layout, Factor::Qubit(1))?;
    }
    y = u.adjoint().conjugate(&y)?;
    let (_, out) = project_qubits(layout, &y, &[1], &config.ancilla)?;
    let h = normalize(out)?;
    let fidelity = psi.dotc(&(&h.state * &psi)).re;
    Ok(HybridEntangledOutput {
        state: h.state,
        success: h.success,
        fidelity,
    })
}

/// Hybrid-entangled state after the bare mode channel.
pub fn hybrid_entangled_unsuppressed(
    alpha: Complex64,
    beta: Complex64,
    sign: f64,
    cv_noise: &KrausChannel,
) -> Result<f64> {
    let space = match cv_noise.terms() {
        crate::channels::KrausTerms::Mode(t) => t
            .first()
            .map(|k| k.space())
            .ok_or(Error::InvalidParameter("empty channel".into()))?,
        crate::channels::KrausTerms::Qubit(_) => return Err(Error::InvalidParameter("mode channel expected".into())),
    };
    let psi = hybrid_entangled_ket(alpha, beta, sign, space)?;
    let layout = HybridLayout::new(space, 1)?;
    let y = cv_noise.apply_to(&(&psi * psi.adjoint()), layout, Factor::Mode)?;
    Ok(psi.dotc(&(&y * &psi)).re)
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Largest entry of `m` (for diagnostics in tests and tools).
pub fn max_entry(m: &CMat) -> f64 {
    max_abs(m)
}
