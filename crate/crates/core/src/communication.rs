//! Two-party transmission of a qumode with a preshared Bell pair, and the
//! qubit teleportation baseline.
//!
//! The sender applies `exp(iπ/2 a†a σx)` with its half of the pair, the mode
//! travels through the noisy channel, and the receiver applies
//! `exp(−iπ/2 a†a σx)` with the other half. Both qubits are then measured and
//! the mode is kept on outcome `00` (or on either `00` or `11`).

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::channels::{noisy_bell, Factor, GainLoss, KrausChannel};
use crate::codes::BosonicCode;
use crate::fidelity::HeraldedMap;
use crate::fock::{CMat, CVec, FockSpace};
use crate::hybrid::{project_qubits, HybridGate, HybridLayout};
use crate::qubit::{self, sigma_x, sigma_z, Axis};
use crate::suppression::{normalize, rescaled_trace};
use crate::{Error, Result};

/// Accepted measurement outcomes of the two Bell-pair qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Herald {
    /// Keep the mode only on `00`.
    Only00,
    /// Keep the mode on `00` or `11`, mixing the two raw outputs.
    #[default]
    Both,
}

/// A single two-qubit outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Both qubits read `0`.
    Zeros,
    /// Both qubits read `1`.
    Ones,
}

impl Outcome {
    fn bits(self) -> [usize; 2] {
        match self {
            Self::Zeros => [0, 0],
            Self::Ones => [1, 1],
        }
    }
}

/// Communication settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CommConfig {
    /// Composite damping strength on each qubit of the Bell pair.
    pub bell_noise: f64,
    /// Accepted outcomes.
    pub herald: Herald,
}

impl CommConfig {
    /// Checks `p ∈ [0, 1]`.
    pub fn new(bell_noise: f64, herald: Herald) -> Result<Self> {
        if !(0.0..=1.0).contains(&bell_noise) {
            return Err(Error::InvalidParameter(alloc::format!(
                "bell noise {bell_noise} outside [0, 1]"
            )));
        }
        Ok(Self { bell_noise, herald })
    }
}

/// The two-party protocol as a heralded map on the mode.
#[derive(Clone, Debug)]
pub struct CommProtocol {
    layout: HybridLayout,
    sender: HybridGate,
    receiver: HybridGate,
    cv_noise: KrausChannel,
    bell: CMat,
    herald: Herald,
}

impl CommProtocol {
    /// Builds the protocol for a mode channel.
    pub fn new(space: FockSpace, cv_noise: KrausChannel, config: CommConfig) -> Result<Self> {
        let config = CommConfig::new(config.bell_noise, config.herald)?;
        let layout = HybridLayout::new(space, 2)?;
        Ok(Self {
            layout,
            sender: HybridGate::conditional_rotation(layout, 0, FRAC_PI_2, Axis::X)?,
            receiver: HybridGate::conditional_rotation(layout, 1, -FRAC_PI_2, Axis::X)?,
            cv_noise,
            bell: noisy_bell(config.bell_noise)?,
            herald: config.herald,
        })
    }

    /// Unnormalized mode output for one outcome.
    pub fn outcome(&self, x: &CMat, outcome: Outcome) -> Result<CMat> {
        self.layout.space().check_square(x)?;
        let mut y = self.sender.conjugate(&x.kronecker(&self.bell))?;
        y = self.cv_noise.apply_to(&y, self.layout, Factor::Mode)?;
        y = self.receiver.conjugate(&y)?;
        let ket = qubit::register_ket(&outcome.bits());
        Ok(project_qubits(self.layout, &y, &[0, 1], &ket)?.1)
    }
}

impl HeraldedMap for CommProtocol {
    fn apply(&self, x: &CMat) -> Result<CMat> {
        let y = self.outcome(x, Outcome::Zeros)?;
        match self.herald {
            Herald::Only00 => Ok(y),
            Herald::Both => Ok(y + self.outcome(x, Outcome::Ones)?),
        }
    }

    fn truncation_defect(&self) -> f64 {
        self.cv_noise.cptp_defect()
    }
}

/// Result of a single communication run.
#[derive(Clone, Debug, PartialEq)]
pub struct CommOutput {
    /// Normalized accepted mode state.
    pub state: CMat,
    /// Probability of outcome `00`.
    pub p00: f64,
    /// Probability of outcome `11`.
    pub p11: f64,
    /// Total acceptance probability under the chosen herald.
    pub success: f64,
}

/// Runs the protocol on a unit-trace mode state.
pub fn run_communication(rho: &CMat, cv_noise: &KrausChannel, config: CommConfig) -> Result<CommOutput> {
    let space = FockSpace::new(rho.nrows())?;
    let proto = CommProtocol::new(space, cv_noise.clone(), config)?;
    let y00 = proto.outcome(rho, Outcome::Zeros)?;
    let y11 = proto.outcome(rho, Outcome::Ones)?;
    let (p00, p11) = (y00.trace().re, y11.trace().re);
    let accepted = match config.herald {
        Herald::Only00 => y00,
        Herald::Both => y00 + y11,
    };
    let h = normalize(accepted)?;
    Ok(CommOutput {
        state: h.state,
        p00,
        p11,
        success: h.success,
    })
}

/// Haar-averaged probability of a single outcome.
pub fn closed_form_outcome_success(code: &BosonicCode, gl: GainLoss, p: f64, outcome: Outcome) -> f64 {
    let d = 2.0 * gl.gain - 1.0;
    let weight = |n: usize| {
        let s = (FRAC_PI_2 * n as f64).sin().powi(2);
        match outcome {
            Outcome::Zeros => s,
            Outcome::Ones => 1.0 - s,
        }
    };
    let t = rescaled_trace(code, gl, |_| 1.0);
    let tw = code.number_trace(weight);
    let twx = rescaled_trace(code, gl, weight);
    0.25 * (1.0 + p + (1.0 - p + 2.0 * p * p) / d * t - 2.0 * p * (tw + twx / d))
}

/// Haar-averaged acceptance probability under a herald.
pub fn closed_form_comm_success(code: &BosonicCode, gl: GainLoss, p: f64, herald: Herald) -> f64 {
    match herald {
        Herald::Only00 => closed_form_outcome_success(code, gl, p, Outcome::Zeros),
        Herald::Both => {
            let d = 2.0 * gl.gain - 1.0;
            0.5 + (1.0 - 2.0 * p * (1.0 - p)) / (2.0 * d) * rescaled_trace(code, gl, |_| 1.0)
        }
    }
}

/// Average teleportation fidelity `1 − p + 2p²/3` with a damped Bell pair.
pub fn teleportation_fidelity(p: f64) -> f64 {
    1.0 - p + 2.0 * p * p / 3.0
}

/// Teleportation fidelity of a pure input with population `ρ₀₀`.
pub fn teleportation_state_fidelity(rho00: f64, p: f64) -> f64 {
    1.0 - p + p * p - 2.0 * p * p * rho00 * (1.0 - rho00)
}

fn bell_kets() -> [(CVec, CMat); 4] {
    let h = Complex64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
    let ket = |a: [usize; 2], b: [usize; 2], sign: f64| {
        (qubit::register_ket(&a) + qubit::register_ket(&b) * Complex64::new(sign, 0.0)) * h
    };
    let (x, z) = (sigma_x(), sigma_z());
    [
        (ket([0, 0], [1, 1], 1.0), CMat::identity(2, 2)),
        (ket([0, 0], [1, 1], -1.0), z.clone()),
        (ket([0, 1], [1, 0], 1.0), x.clone()),
        (ket([0, 1], [1, 0], -1.0), &z * &x),
    ]
}

/// Teleports a qubit state through `noisy_bell(p)` with an ideal Bell
/// measurement and Pauli corrections.
pub fn teleport(rho: &CMat, p: f64) -> Result<CMat> {
    if rho.shape() != (2, 2) {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho.nrows(),
        });
    }
    let full = rho.kronecker(&noisy_bell(p)?);
    let mut out = CMat::zeros(2, 2);
    for (bell, correction) in bell_kets() {
        let m = bell.adjoint().kronecker(&CMat::identity(2, 2));
        let y = &m * &full * m.adjoint();
        out += &correction * y * correction.adjoint();
    }
    Ok(out)
}

/// Simulated teleportation fidelities over the six-state design.
pub fn teleportation_design_fidelities(p: f64) -> Result<Vec<f64>> {
    crate::haar::six_state_design()
        .iter()
        .map(|c| {
            let psi = CVec::from_column_slice(c);
            let out = teleport(&(&psi * psi.adjoint()), p)?;
            Ok(psi.dotc(&(&out * &psi)).re)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{thermal_channel, ThermalParams};
    use crate::codes::{binomial_code, cat_code};
    use crate::fidelity::LogicalProcess;
    use crate::fock::max_abs;
    use crate::suppression::{run_suppression, SuppressionConfig, SuppressionProtocol};
    use approx::assert_abs_diff_eq;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn noiseless_outcomes_split_evenly() {
        let s = FockSpace::new(20).unwrap();
        let code = binomial_code(2, 4, s).unwrap();
        let psi = code.encode([re(0.6), re(0.8)]);
        let rho = &psi * psi.adjoint();
        let out = run_communication(
            &rho,
            &KrausChannel::mode_identity(s),
            CommConfig::new(0.0, Herald::Both).unwrap(),
        )
        .unwrap();
        assert_abs_diff_eq!(out.p00, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(out.p11, 0.5, epsilon = 1e-14);
        assert!(max_abs(&(out.state - rho)) < 1e-14);
    }

    #[test]
    fn clean_pair_matches_single_party() {
        let s = FockSpace::new(40).unwrap();
        let ch = thermal_channel(0.05, 0.5, s).unwrap();
        for code in [binomial_code(2, 4, s).unwrap(), cat_code(2, re(2.0), s).unwrap()] {
            let psi = code.encode([re(0.6), Complex64::new(0.0, 0.8)]);
            let rho = &psi * psi.adjoint();
            let two = run_communication(&rho, &ch, CommConfig::new(0.0, Herald::Both).unwrap()).unwrap();
            let one = run_suppression(&rho, &ch, &SuppressionConfig::default()).unwrap();
            assert_abs_diff_eq!(two.success, one.success, epsilon = 1e-12);
            assert!(max_abs(&(two.state - one.state)) < 1e-12);
        }
    }

    #[test]
    fn clean_pair_process_equals_single_party() {
        let s = FockSpace::new(40).unwrap();
        let ch = thermal_channel(0.05, 0.5, s).unwrap();
        let code = cat_code(6, re(1.916), s).unwrap();
        let two = LogicalProcess::new(
            &code,
            &CommProtocol::new(s, ch.clone(), CommConfig::new(0.0, Herald::Both).unwrap()).unwrap(),
        )
        .unwrap();
        let one = LogicalProcess::new(
            &code,
            &SuppressionProtocol::new(s, ch, SuppressionConfig::default()).unwrap(),
        )
        .unwrap();
        assert!(two.distance(&one) < 1e-12);
    }

    #[test]
    fn outcome_closed_forms_match_simulation() {
        let s = FockSpace::new(60).unwrap();
        let noise = ThermalParams::new(0.05, 0.5).unwrap();
        let ch = thermal_channel(0.05, 0.5, s).unwrap();
        for code in [binomial_code(2, 4, s).unwrap(), cat_code(2, re(2.0), s).unwrap()] {
            for p in [0.0, 0.2, 0.7] {
                let proto = CommProtocol::new(s, ch.clone(), CommConfig::new(p, Herald::Both).unwrap()).unwrap();
                let (mut s00, mut s11) = (0.0, 0.0);
                for c in crate::haar::six_state_design() {
                    let psi = code.encode(c);
                    let rho = &psi * psi.adjoint();
                    s00 += proto.outcome(&rho, Outcome::Zeros).unwrap().trace().re / 6.0;
                    s11 += proto.outcome(&rho, Outcome::Ones).unwrap().trace().re / 6.0;
                }
                let gl = noise.gain_loss();
                assert_abs_diff_eq!(
                    s00,
                    closed_form_outcome_success(&code, gl, p, Outcome::Zeros),
                    epsilon = 1e-8
                );
                assert_abs_diff_eq!(
                    s11,
                    closed_form_outcome_success(&code, gl, p, Outcome::Ones),
                    epsilon = 1e-8
                );
                let both = LogicalProcess::new(&code, &proto).unwrap().average_success();
                assert_abs_diff_eq!(
                    both,
                    closed_form_comm_success(&code, gl, p, Herald::Both),
                    epsilon = 1e-8
                );
            }
        }
    }

    #[test]
    fn outcomes_sum_to_both() {
        let s = FockSpace::new(40).unwrap();
        let code = cat_code(6, re(1.916), s).unwrap();
        for eta in [0.02, 0.05, 0.1] {
            for nbar in [0.0, 0.5, 1.0] {
                for p in [0.0, 0.3, 0.9] {
                    let gl = ThermalParams::new(eta, nbar).unwrap().gain_loss();
                    let sum = closed_form_outcome_success(&code, gl, p, Outcome::Zeros)
                        + closed_form_outcome_success(&code, gl, p, Outcome::Ones);
                    assert_abs_diff_eq!(
                        sum,
                        closed_form_comm_success(&code, gl, p, Herald::Both),
                        epsilon = 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn teleportation_closed_form_values() {
        assert_eq!(teleportation_fidelity(0.0), 1.0);
        assert_abs_diff_eq!(teleportation_fidelity(0.3), 0.76, epsilon = 1e-15);
    }

    #[test]
    fn teleportation_simulation() {
        for p in [0.0, 0.1, 0.5, 0.9] {
            let fs = teleportation_design_fidelities(p).unwrap();
            for (f, c) in fs.iter().zip(crate::haar::six_state_design()) {
                assert_abs_diff_eq!(*f, teleportation_state_fidelity(c[0].norm_sqr(), p), epsilon = 1e-14);
            }
            let avg = fs.iter().sum::<f64>() / 6.0;
            assert_abs_diff_eq!(avg, teleportation_fidelity(p), epsilon = 1e-13);
        }
    }

    #[test]
    fn teleported_state_has_unit_trace() {
        let rho = CMat::from_row_slice(
            2,
            2,
            &[re(0.3), Complex64::new(0.1, 0.2), Complex64::new(0.1, -0.2), re(0.7)],
        );
        let out = teleport(&rho, 0.4).unwrap();
        assert_abs_diff_eq!(out.trace().re, 1.0, epsilon = 1e-14);
        assert!(max_abs(&(teleport(&rho, 0.0).unwrap() - rho)) < 1e-14);
    }

    #[test]
    fn only00_beats_both_for_even_code() {
        let s = FockSpace::new(60).unwrap();
        let code = binomial_code(2, 4, s).unwrap();
        let ch = thermal_channel(0.05, 0.5, s).unwrap();
        let f = |h| {
            let proto = CommProtocol::new(s, ch.clone(), CommConfig::new(0.1, h).unwrap()).unwrap();
            LogicalProcess::new(&code, &proto)
                .unwrap()
                .average_fidelity()
                .unwrap()
                .value
        };
        assert!(f(Herald::Only00) >= f(Herald::Both));
    }

    #[test]
    fn bell_noise_range_is_checked() {
        assert!(CommConfig::new(1.5, Herald::Both).is_err());
    }
}
