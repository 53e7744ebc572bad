//! Haar moments of pure logical states and seeded sampling.
//!
//! For a Haar-random pure state `ρ` in dimension `d`,
//! `E[ρ^{⊗t}] = Σ_{π∈S_t} P_π / (d(d+1)…(d+t−1))`, so
//! `E[Π_j tr(ρ M_j)]` is a sum over permutations of products of cycle traces.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::codes::BosonicCode;
use crate::fock::CMat;
use crate::{Error, Result};

/// Amplitudes `(c₀, c₁)` of a logical qubit state.
pub type LogicalAmplitudes = [Complex64; 2];

/// Compression `⟨μ_L|X|ν_L⟩` of a mode operator.
#[derive(Clone, Debug, PartialEq)]
pub struct LogicalObservable(CMat);

impl LogicalObservable {
    /// Compresses `x` to the codespace of `code`.
    pub fn new(code: &BosonicCode, x: &CMat) -> Result<Self> {
        code.compress(x).map(Self)
    }

    /// Wraps a `2×2` matrix.
    pub fn from_matrix(m: CMat) -> Result<Self> {
        if m.shape() != (2, 2) {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: m.nrows(),
            });
        }
        Ok(Self(m))
    }

    /// The `2×2` matrix.
    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    /// `⟨ψ|M|ψ⟩` for `ψ = c₀|0⟩ + c₁|1⟩`.
    pub fn expectation(&self, c: &LogicalAmplitudes) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                acc += c[i].conj() * self.0[(i, j)] * c[j];
            }
        }
        acc
    }
}

fn permutations(t: usize) -> Vec<Vec<usize>> {
    if t == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(t - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, t - 1);
            out.push(q);
        }
    }
    out
}

/// `E[Π_j tr(ρ M_j)]` over Haar-random pure states in dimension `d`, for any
/// number of square `d×d` matrices.
pub(crate) fn permutation_moment(observables: &[CMat]) -> Result<Complex64> {
    let t = observables.len();
    let d = observables.first().map_or(2, |m| m.nrows());
    for m in observables {
        if m.shape() != (d, d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: m.nrows(),
            });
        }
    }
    let mut total = Complex64::new(0.0, 0.0);
    for perm in permutations(t) {
        let mut seen = vec![false; t];
        let mut term = Complex64::new(1.0, 0.0);
        for start in 0..t {
            if seen[start] {
                continue;
            }
            let mut prod = CMat::identity(d, d);
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                prod *= &observables[i];
                i = perm[i];
            }
            term *= prod.trace();
        }
        total += term;
    }
    let rising: f64 = (0..t).map(|k| (d + k) as f64).product();
    Ok(total / rising)
}

/// `E[tr(ρ_L M₁)…tr(ρ_L M_t)]` over Haar-random logical qubit states for
/// `t ∈ {1, 2, 3}`.
pub fn haar_average(t: usize, observables: &[LogicalObservable]) -> Result<Complex64> {
    if !(1..=3).contains(&t) {
        return Err(Error::UnsupportedMomentOrder(t));
    }
    if observables.len() != t {
        return Err(Error::DimensionMismatch {
            expected: t,
            found: observables.len(),
        });
    }
    let ms: Vec<CMat> = observables.iter().map(|o| o.0.clone()).collect();
    permutation_moment(&ms)
}

/// `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
pub fn bloch_state(theta: f64, phi: f64) -> LogicalAmplitudes {
    let (s, c) = (theta / 2.0).sin_cos();
    [Complex64::new(c, 0.0), Complex64::from_polar(s, phi)]
}

/// The six Pauli eigenstates, an exact qubit 2-design (in fact a 3-design).
pub fn six_state_design() -> [LogicalAmplitudes; 6] {
    let h = FRAC_1_SQRT_2;
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    [
        [one, z],
        [z, one],
        [Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
        [Complex64::new(h, 0.0), Complex64::new(-h, 0.0)],
        [Complex64::new(h, 0.0), Complex64::new(0.0, h)],
        [Complex64::new(h, 0.0), Complex64::new(0.0, -h)],
    ]
}

/// Average of `f` over the six-state design.
pub fn six_state_average(mut f: impl FnMut(&LogicalAmplitudes) -> f64) -> f64 {
    six_state_design().iter().map(&mut f).sum::<f64>() / 6.0
}

/// Seeded sampler of Haar-random qubit states with real `c₀ ≥ 0`.
#[derive(Clone, Debug)]
pub struct HaarSampler {
    rng: ChaCha20Rng,
}

impl HaarSampler {
    /// Sampler with a fixed seed.
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }
}

impl Iterator for HaarSampler {
    type Item = LogicalAmplitudes;

    fn next(&mut self) -> Option<Self::Item> {
        let mut g = || -> f64 { StandardNormal.sample(&mut self.rng) };
        let c0 = Complex64::new(g(), g());
        let c1 = Complex64::new(g(), g());
        let norm = (c0.norm_sqr() + c1.norm_sqr()).sqrt();
        if norm == 0.0 {
            return Some([Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        }
        // Remove the global phase so that c₀ is real and nonnegative.
        let phase = if c0.norm() > 0.0 {
            c0.conj() / c0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        Some([Complex64::new(c0.norm() / norm, 0.0), c1 * phase / norm])
    }
}

/// `count` Haar-random logical states from `seed`.
pub fn haar_sample(seed: u64, count: usize) -> Vec<LogicalAmplitudes> {
    HaarSampler::new(seed).take(count).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::binomial_code;
    use crate::fock::{FockOperator, FockSpace};
    use crate::qubit::sigma_z;
    use approx::assert_abs_diff_eq;

    fn obs(m: CMat) -> LogicalObservable {
        LogicalObservable::from_matrix(m).unwrap()
    }

    fn arbitrary(seed: f64) -> CMat {
        CMat::from_fn(2, 2, |i, j| {
            Complex64::new((seed * (1 + i + 2 * j) as f64).sin(), (seed * (3 + i * j) as f64).cos())
        })
    }

    #[test]
    fn identity_has_unit_mean() {
        let v = haar_average(1, &[obs(CMat::identity(2, 2))]).unwrap();
        assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn sigma_z_second_moment() {
        let z = obs(sigma_z());
        let v = haar_average(2, &[z.clone(), z]).unwrap();
        assert_abs_diff_eq!(v.re, 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn unsupported_order() {
        let z = obs(sigma_z());
        assert_eq!(haar_average(4, &vec![z; 4]), Err(Error::UnsupportedMomentOrder(4)));
        assert!(haar_average(2, &[obs(sigma_z())]).is_err());
    }

    #[test]
    fn second_and_third_moments_match_six_state_design() {
        for seed in [0.3, 1.7, 2.9] {
            let ms = [
                obs(arbitrary(seed)),
                obs(arbitrary(seed + 0.5)),
                obs(arbitrary(seed + 1.1)),
            ];
            let exact2 = haar_average(2, &ms[..2]).unwrap();
            let exact3 = haar_average(3, &ms).unwrap();
            let (mut d2, mut d3) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for c in six_state_design() {
                let e: Vec<_> = ms.iter().map(|m| m.expectation(&c)).collect();
                d2 += e[0] * e[1] / 6.0;
                d3 += e[0] * e[1] * e[2] / 6.0;
            }
            assert!((exact2 - d2).norm() < 1e-12);
            assert!((exact3 - d3).norm() < 1e-12);
        }
    }

    #[test]
    fn general_dimension_second_moment() {
        // E[|⟨0|ψ⟩|⁴] = 2/(d(d+1)).
        let mut p = CMat::zeros(3, 3);
        p[(0, 0)] = Complex64::new(1.0, 0.0);
        let v = permutation_moment(&[p.clone(), p]).unwrap();
        assert_abs_diff_eq!(v.re, 2.0 / 12.0, epsilon = 1e-15);
    }

    #[test]
    fn sampler_is_reproducible_and_real_phase() {
        let a = haar_sample(7, 5);
        assert_eq!(a, haar_sample(7, 5));
        assert_ne!(a, haar_sample(8, 5));
        for c in &a {
            assert_eq!(c[0].im, 0.0);
            assert!(c[0].re >= 0.0);
            assert_abs_diff_eq!(c[0].norm_sqr() + c[1].norm_sqr(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn sampler_moments() {
        let n = 200_000;
        let xs: Vec<f64> = HaarSampler::new(11).take(n).map(|c| c[0].norm_sqr()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        // |c₀|² is uniform on [0,1]: σ² = 1/12.
        assert!((mean - 0.5).abs() < 3.0 * (1.0 / 12.0 / n as f64).sqrt());
        let m4 = xs.iter().map(|x| x * x).sum::<f64>() / n as f64;
        // Var(x²) = 1/5 − 1/9.
        assert!((m4 - 1.0 / 3.0).abs() < 3.0 * ((1.0 / 5.0 - 1.0 / 9.0) / n as f64).sqrt());
    }

    #[test]
    fn binomial_moment_against_monte_carlo() {
        let s = FockSpace::new(20).unwrap();
        let code = binomial_code(2, 4, s).unwrap();
        let n = LogicalObservable::new(&code, FockOperator::number(s).matrix()).unwrap();
        let a = FockOperator::annihilation(s);
        let a2 = LogicalObservable::new(&code, &(a.matrix() * a.matrix())).unwrap();
        let a2dag = LogicalObservable::new(&code, &(a.matrix() * a.matrix()).adjoint()).unwrap();
        for pair in [[n, a2.clone()], [a2, a2dag]] {
            let exact = haar_average(2, &pair).unwrap();
            let count = 1_000_000;
            let (mut sum, mut sum_sq) = (Complex64::new(0.0, 0.0), 0.0);
            for c in HaarSampler::new(2024).take(count) {
                let v = pair[0].expectation(&c) * pair[1].expectation(&c);
                sum += v;
                sum_sq += v.norm_sqr();
            }
            let mean = sum / count as f64;
            let var = sum_sq / count as f64 - mean.norm_sqr();
            let se = (var / count as f64).sqrt();
            assert!((mean - exact).norm() < 3.0 * se, "{mean} vs {exact}, se {se}");
        }
    }
}
