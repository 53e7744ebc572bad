//! Heralded logical processes and their Haar averages.
//!
//! A heralded protocol is a linear, completely positive map `Φ` from mode
//! operators to (unnormalized) mode operators. Evaluating it on the four
//! codeword dyads `|μ_L⟩⟨ν_L|` gives
//!
//! ```text
//! T[α][β][μ][ν] = ⟨α_L|Φ(|μ_L⟩⟨ν_L|)|β_L⟩,   S[μ][ν] = tr Φ(|μ_L⟩⟨ν_L|),
//! ```
//!
//! from which the success probability and heralded fidelity of any encoded
//! state `c₀|0_L⟩ + c₁|1_L⟩` follow without further simulation.

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::codes::BosonicCode;
use crate::fock::CMat;
use crate::haar::{bloch_state, six_state_average, HaarSampler, LogicalAmplitudes};
use crate::quadrature::sphere_rule;
use crate::{Error, Result};

/// Smallest herald probability treated as nonzero.
pub const MIN_SUCCESS: f64 = 1e-300;
/// Default convergence target of the adaptive sphere quadrature.
pub const QUADRATURE_TOL: f64 = 1e-8;
/// Starting Gauss–Legendre order.
pub const QUADRATURE_START: usize = 4;
/// Largest Gauss–Legendre order tried.
pub const QUADRATURE_MAX: usize = 256;

/// Heralded linear map on mode operators.
pub trait HeraldedMap {
    /// Unnormalized heralded output for an arbitrary mode operator.
    fn apply(&self, x: &CMat) -> Result<CMat>;

    /// CPTP defect of the channels involved.
    fn truncation_defect(&self) -> f64 {
        0.0
    }
}

impl<F: Fn(&CMat) -> Result<CMat>> HeraldedMap for F {
    fn apply(&self, x: &CMat) -> Result<CMat> {
        self(x)
    }
}

/// Dyad tensors of a heralded map restricted to a code.
#[derive(Clone, Debug, PartialEq)]
pub struct LogicalProcess {
    t: [[[[Complex64; 2]; 2]; 2]; 2],
    s: [[Complex64; 2]; 2],
    defect: f64,
}

/// Result of an adaptive average.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Averaged {
    /// Averaged value.
    pub value: f64,
    /// Change between the last two quadrature orders.
    pub change: f64,
    /// Gauss–Legendre order of the accepted rule.
    pub order: usize,
}

impl LogicalProcess {
    /// Evaluates `map` on the codeword dyads. `Φ(|1_L⟩⟨0_L|)` is taken as
    /// `Φ(|0_L⟩⟨1_L|)†`, which holds for every Hermiticity-preserving map.
    pub fn new(code: &BosonicCode, map: &impl HeraldedMap) -> Result<Self> {
        let k = [code.ket0(), code.ket1()];
        let y00 = map.apply(&(k[0] * k[0].adjoint()))?;
        let y11 = map.apply(&(k[1] * k[1].adjoint()))?;
        let y01 = map.apply(&(k[0] * k[1].adjoint()))?;
        let y10 = y01.adjoint();
        let mut p = Self::from_images(code, [[y00, y01], [y10, y11]])?;
        p.defect = map.truncation_defect();
        Ok(p)
    }

    /// Builds the tensors from precomputed dyad images `Φ(|μ_L⟩⟨ν_L|)`.
    pub fn from_images(code: &BosonicCode, images: [[CMat; 2]; 2]) -> Result<Self> {
        let n = code.space().cutoff();
        let k = [code.ket0(), code.ket1()];
        let mut t = [[[[Complex64::new(0.0, 0.0); 2]; 2]; 2]; 2];
        let mut s = [[Complex64::new(0.0, 0.0); 2]; 2];
        for mu in 0..2 {
            for nu in 0..2 {
                let y = &images[mu][nu];
                if y.shape() != (n, n) {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: y.nrows(),
                    });
                }
                s[mu][nu] = y.trace();
                for beta in 0..2 {
                    let yb = y * k[beta];
                    for alpha in 0..2 {
                        t[alpha][beta][mu][nu] = k[alpha].dotc(&yb);
                    }
                }
            }
        }
        Ok(Self { t, s, defect: 0.0 })
    }

    pub(crate) fn from_parts(t: [[[[Complex64; 2]; 2]; 2]; 2], s: [[Complex64; 2]; 2], defect: f64) -> Self {
        Self { t, s, defect }
    }

    /// `⟨α_L|Φ(|μ_L⟩⟨ν_L|)|β_L⟩`.
    pub fn tensor(&self) -> &[[[[Complex64; 2]; 2]; 2]; 2] {
        &self.t
    }

    /// `tr Φ(|μ_L⟩⟨ν_L|)`.
    pub fn traces(&self) -> &[[Complex64; 2]; 2] {
        &self.s
    }

    /// CPTP defect of the channels used to build the process.
    pub fn truncation_defect(&self) -> f64 {
        self.defect
    }

    /// Herald probability of an encoded state.
    pub fn success(&self, c: &LogicalAmplitudes) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for mu in 0..2 {
            for nu in 0..2 {
                acc += c[mu] * c[nu].conj() * self.s[mu][nu];
            }
        }
        acc.re
    }

    fn overlap(&self, c: &LogicalAmplitudes) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..2 {
            for b in 0..2 {
                for mu in 0..2 {
                    for nu in 0..2 {
                        acc += c[a].conj() * c[b] * c[mu] * c[nu].conj() * self.t[a][b][mu][nu];
                    }
                }
            }
        }
        acc.re
    }

    /// Heralded (normalized) fidelity of an encoded state with its output.
    pub fn fidelity(&self, c: &LogicalAmplitudes) -> Result<f64> {
        let p = self.success(c);
        if !(p > MIN_SUCCESS) {
            return Err(Error::ZeroSuccess);
        }
        Ok(self.overlap(c) / p)
    }

    /// Unnormalized overlap `⟨ψ|Φ(|ψ⟩⟨ψ|)|ψ⟩`; equals the fidelity for
    /// trace-preserving maps.
    pub fn unnormalized_overlap(&self, c: &LogicalAmplitudes) -> f64 {
        self.overlap(c)
    }

    /// Exact Haar average of the success probability (quadratic in the
    /// Bloch vector, so the six-state design is exact).
    pub fn average_success(&self) -> f64 {
        six_state_average(|c| self.success(c))
    }

    /// Haar average of the heralded fidelity by adaptive sphere quadrature.
    pub fn average_fidelity(&self) -> Result<Averaged> {
        self.average_fidelity_with(QUADRATURE_START, QUADRATURE_MAX, QUADRATURE_TOL)
    }

    /// Haar average of the heralded fidelity: the order starts at `start`
    /// and doubles until two successive values differ by less than `tol`.
    pub fn average_fidelity_with(&self, start: usize, max: usize, tol: f64) -> Result<Averaged> {
        let mut order = start.max(1);
        let mut prev = self.quadrature(order)?;
        loop {
            let next_order = order * 2;
            if next_order > max {
                return Err(Error::QuadratureNotConverged {
                    order,
                    change: f64::NAN,
                });
            }
            let next = self.quadrature(next_order)?;
            let change = (next - prev).abs();
            if change < tol {
                return Ok(Averaged {
                    value: next,
                    change,
                    order: next_order,
                });
            }
            if next_order * 2 > max {
                return Err(Error::QuadratureNotConverged {
                    order: next_order,
                    change,
                });
            }
            order = next_order;
            prev = next;
        }
    }

    fn quadrature(&self, n: usize) -> Result<f64> {
        let mut acc = 0.0;
        for (theta, phi, w) in sphere_rule(n) {
            acc += w * self.fidelity(&bloch_state(theta, phi))?;
        }
        Ok(acc)
    }

    /// Monte Carlo estimate `(mean, standard error)` of the average fidelity.
    pub fn monte_carlo_fidelity(&self, seed: u64, count: usize) -> Result<(f64, f64)> {
        let (mut sum, mut sq) = (0.0, 0.0);
        for c in HaarSampler::new(seed).take(count) {
            let f = self.fidelity(&c)?;
            sum += f;
            sq += f * f;
        }
        let n = count.max(1) as f64;
        let mean = sum / n;
        let var = (sq / n - mean * mean).max(0.0);
        Ok((mean, (var / n).sqrt()))
    }

    /// Largest entrywise difference of the dyad tensors.
    pub fn distance(&self, other: &Self) -> f64 {
        let mut d = 0.0_f64;
        for a in 0..2 {
            for b in 0..2 {
                for mu in 0..2 {
                    for nu in 0..2 {
                        d = d.max((self.t[a][b][mu][nu] - other.t[a][b][mu][nu]).norm());
                    }
                }
                d = d.max((self.s[a][b] - other.s[a][b]).norm());
            }
        }
        d
    }
}
