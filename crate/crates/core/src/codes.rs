//! Single-mode bosonic codes: ring cat codes, binomial codes and
//! finite-energy square-lattice GKP codes.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::fock::{coherent_ket, parity_weight, CMat, CVec, FockOperator, FockSpace};
use crate::{Error, Result};

/// Largest weight allowed on the wrong parity sector.
pub const PARITY_TOL: f64 = 1e-10;
/// Largest codeword overlap accepted after truncation.
pub const ORTHOGONALITY_TOL: f64 = 1e-8;
/// Largest norm weight a GKP codeword may lose at the cutoff.
pub const GKP_TAIL_TOL: f64 = 1e-8;

/// Photon-number parity class of a code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    /// Both codewords have even photon number.
    LikeEven,
    /// Both codewords have odd photon number.
    LikeOdd,
    /// The codewords have different parities.
    Opposite,
}

impl Parity {
    /// True for like-parity codes.
    pub fn is_like(self) -> bool {
        !matches!(self, Self::Opposite)
    }
}

/// Code family and parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CodeLabel {
    /// `cat(n, α)`.
    Cat {
        /// Number of coherent components on the ring.
        n: usize,
        /// Ring amplitude.
        alpha: Complex64,
    },
    /// `bin(gap, κ)`.
    Binomial {
        /// Fock spacing.
        gap: usize,
        /// Binomial order.
        kappa: usize,
    },
    /// Square GKP with envelope `e^{−Δ² a†a}`.
    Gkp {
        /// Damping parameter.
        delta: f64,
    },
}

impl CodeLabel {
    /// Family name.
    pub fn family(&self) -> &'static str {
        match self {
            Self::Cat { .. } => "cat",
            Self::Binomial { .. } => "bin",
            Self::Gkp { .. } => "gkp",
        }
    }

    /// Parameter list in specifier syntax, e.g. `n=6,alpha=1.916`.
    pub fn params(&self) -> alloc::string::String {
        match self {
            Self::Cat { n, alpha } if alpha.im == 0.0 => format!("n={n},alpha={}", alpha.re),
            Self::Cat { n, alpha } => format!("n={n},alpha={}{:+}i", alpha.re, alpha.im),
            Self::Binomial { gap, kappa } => format!("n={gap},kappa={kappa}"),
            Self::Gkp { delta } => format!("delta={delta}"),
        }
    }
}

impl fmt::Display for CodeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.family(), self.params())
    }
}

/// Orthonormal logical kets on a truncated Fock space.
#[derive(Clone, Debug, PartialEq)]
pub struct BosonicCode {
    label: CodeLabel,
    space: FockSpace,
    kets: [CVec; 2],
    parity: Parity,
    raw_overlap: f64,
}

impl BosonicCode {
    /// Wraps two kets, checking normalization, orthogonality and parity.
    pub fn from_kets(label: CodeLabel, space: FockSpace, ket0: CVec, ket1: CVec) -> Result<Self> {
        space.check_ket(&ket0)?;
        space.check_ket(&ket1)?;
        for k in [&ket0, &ket1] {
            let defect = (k.norm() - 1.0).abs();
            if defect > 1e-10 {
                return Err(Error::NotPhysical {
                    what: "codeword normalization",
                    defect,
                });
            }
        }
        let overlap = ket0.dotc(&ket1).norm();
        if overlap > ORTHOGONALITY_TOL {
            return Err(Error::NonOrthogonal { overlap });
        }
        let parity = classify(&ket0, &ket1)?;
        Ok(Self {
            label,
            space,
            kets: [ket0, ket1],
            parity,
            raw_overlap: overlap,
        })
    }

    /// Family and parameters.
    pub fn label(&self) -> CodeLabel {
        self.label
    }

    /// Fock space.
    pub fn space(&self) -> FockSpace {
        self.space
    }

    /// `|0_L⟩`.
    pub fn ket0(&self) -> &CVec {
        &self.kets[0]
    }

    /// `|1_L⟩`.
    pub fn ket1(&self) -> &CVec {
        &self.kets[1]
    }

    /// `|μ_L⟩` for `μ ∈ {0, 1}`.
    pub fn ket(&self, mu: usize) -> &CVec {
        &self.kets[mu & 1]
    }

    /// Parity class.
    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// `|⟨0_L|1_L⟩|` before any orthonormalization.
    pub fn raw_overlap(&self) -> f64 {
        self.raw_overlap
    }

    /// Encoded ket `c₀|0_L⟩ + c₁|1_L⟩`.
    pub fn encode(&self, c: [Complex64; 2]) -> CVec {
        &self.kets[0] * c[0] + &self.kets[1] * c[1]
    }

    /// Codespace identity `C_L = (|0_L⟩⟨0_L| + |1_L⟩⟨1_L|)/2`.
    pub fn codespace_identity(&self) -> CMat {
        (&self.kets[0] * self.kets[0].adjoint() + &self.kets[1] * self.kets[1].adjoint()) * Complex64::new(0.5, 0.0)
    }

    /// Compression `⟨μ_L|X|ν_L⟩` of a mode operator to the codespace.
    pub fn compress(&self, x: &CMat) -> Result<CMat> {
        self.space.check_square(x)?;
        let mut m = CMat::zeros(2, 2);
        for mu in 0..2 {
            let xv = x * &self.kets[mu];
            for nu in 0..2 {
                // ⟨ν|X|μ⟩ lands in (ν, μ).
                m[(nu, mu)] = self.kets[nu].dotc(&xv);
            }
        }
        Ok(m)
    }

    /// `tr{C_L f(a†a)}` for a function of the number operator.
    pub fn number_trace(&self, f: impl Fn(usize) -> f64) -> f64 {
        let mut acc = 0.0;
        for k in &self.kets {
            for (n, z) in k.iter().enumerate() {
                acc += f(n) * z.norm_sqr();
            }
        }
        acc / 2.0
    }
}

fn classify(ket0: &CVec, ket1: &CVec) -> Result<Parity> {
    let sector = |k: &CVec| {
        let odd = parity_weight(k, false);
        let even = parity_weight(k, true);
        if odd < PARITY_TOL {
            Ok(true)
        } else if even < PARITY_TOL {
            Ok(false)
        } else {
            Err(Error::ParityUndefined)
        }
    };
    Ok(match (sector(ket0)?, sector(ket1)?) {
        (true, true) => Parity::LikeEven,
        (false, false) => Parity::LikeOdd,
        _ => Parity::Opposite,
    })
}

fn normalized(mut v: CVec) -> Result<CVec> {
    let norm = v.norm();
    if !(norm > 0.0) {
        return Err(Error::InvalidParameter("codeword vanishes after truncation".into()));
    }
    v /= Complex64::new(norm, 0.0);
    Ok(v)
}

/// `cat(n, α)`: the even ring sum `Σ_k |α e^{2πik/n}⟩` and its alternating
/// partner, supported on `{0 mod n}` and `{n/2 mod n}`.
pub fn cat_code(n: usize, alpha: Complex64, space: FockSpace) -> Result<BosonicCode> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "cat code needs an even component count, got {n}"
        )));
    }
    if alpha.norm() == 0.0 {
        return Err(Error::InvalidParameter("cat amplitude must be nonzero".into()));
    }
    // Σ_k ω^{km} projects the coherent amplitudes onto one residue class.
    let coherent = coherent_ket(space, alpha)?;
    let sector = |r: usize| {
        let v = CVec::from_iterator(
            space.cutoff(),
            coherent
                .iter()
                .enumerate()
                .map(|(m, z)| if m % n == r { *z } else { Complex64::new(0.0, 0.0) }),
        );
        normalized(v)
    };
    BosonicCode::from_kets(CodeLabel::Cat { n, alpha }, space, sector(0)?, sector(n / 2)?)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `bin(gap, κ)`: `|0_L⟩ ∝ Σ_{even j} √C(κ,j) |j·gap⟩`, `|1_L⟩` over odd `j`.
pub fn binomial_code(gap: usize, kappa: usize, space: FockSpace) -> Result<BosonicCode> {
    if gap == 0 || kappa == 0 {
        return Err(Error::InvalidParameter(format!(
            "binomial code needs gap, kappa >= 1, got ({gap}, {kappa})"
        )));
    }
    let top = gap * kappa;
    if top >= space.cutoff() {
        return Err(Error::CutoffExceeded {
            needed: top + 1,
            cutoff: space.cutoff(),
        });
    }
    let word = |odd: usize| {
        let mut v = CVec::zeros(space.cutoff());
        for j in (odd..=kappa).step_by(2) {
            v[j * gap] = Complex64::new(binomial(kappa, j).sqrt(), 0.0);
        }
        normalized(v)
    };
    BosonicCode::from_kets(CodeLabel::Binomial { gap, kappa }, space, word(0)?, word(1)?)
}

/// `ψ_n(x)` for `n < len`, by the three-term recurrence.
pub fn hermite_functions(x: f64, len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    if len == 0 {
        return out;
    }
    out[0] = PI.powf(-0.25) * (-x * x / 2.0).exp();
    if len > 1 {
        out[1] = 2f64.sqrt() * x * out[0];
    }
    for n in 1..len.saturating_sub(1) {
        let nf = n as f64;
        out[n + 1] = (2.0 / (nf + 1.0)).sqrt() * x * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
    }
    out
}

fn gkp_word(mu: usize, delta: f64, len: usize) -> Vec<f64> {
    let root_pi = PI.sqrt();
    let mut acc = vec![0.0; len];
    let add_peak = |x: f64, acc: &mut Vec<f64>| {
        let psi = hermite_functions(x, len);
        let mut biggest = 0.0_f64;
        for (n, (a, p)) in acc.iter_mut().zip(psi).enumerate() {
            let c = (-delta * delta * n as f64).exp() * p;
            *a += c;
            biggest = biggest.max(c.abs());
        }
        biggest
    };
    add_peak(mu as f64 * root_pi, &mut acc);
    let mut s = 1i64;
    loop {
        let right = add_peak((2 * s + mu as i64) as f64 * root_pi, &mut acc);
        let left = add_peak((-2 * s + mu as i64) as f64 * root_pi, &mut acc);
        if right.max(left) < 1e-12 || s > 10_000 {
            break;
        }
        s += 1;
    }
    acc
}

/// Smallest cutoff at which both GKP codewords lose less than `1e−8` of
/// their norm.
pub fn gkp_required_cutoff(delta: f64) -> Result<usize> {
    check_delta(delta)?;
    // The envelope decays like e^{−2Δ²n}; search well past the first guess.
    let guess = ((GKP_TAIL_TOL.ln().abs() + 10.0) / (2.0 * delta * delta)) as usize + 40;
    let words = [gkp_word(0, delta, guess), gkp_word(1, delta, guess)];
    let mut needed = 2;
    for w in &words {
        let total: f64 = w.iter().map(|c| c * c).sum();
        let mut tail = 0.0;
        let mut n = w.len();
        while n > 0 {
            let next = tail + w[n - 1] * w[n - 1];
            if next > GKP_TAIL_TOL * total {
                break;
            }
            tail = next;
            n -= 1;
        }
        needed = needed.max(n);
    }
    Ok(needed)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "GKP damping {delta} must be in (0, 1)"
        )));
    }
    Ok(())
}

/// Finite-energy square GKP code `e^{−Δ² a†a} Σ_s |q = (2s+μ)√π⟩`.
///
/// The finite-`Δ` codewords overlap by about `e^{−π/(4Δ²)}`; they are
/// symmetrically (Löwdin) orthonormalized and the raw overlap is kept in
/// [`BosonicCode::raw_overlap`].
pub fn gkp_code(delta: f64, space: FockSpace) -> Result<BosonicCode> {
    let needed = gkp_required_cutoff(delta)?;
    if needed > space.cutoff() {
        return Err(Error::CutoffExceeded {
            needed,
            cutoff: space.cutoff(),
        });
    }
    let to_ket = |w: Vec<f64>| {
        normalized(CVec::from_iterator(
            space.cutoff(),
            w.into_iter().map(|c| Complex64::new(c, 0.0)),
        ))
    };
    let k0 = to_ket(gkp_word(0, delta, space.cutoff()))?;
    let k1 = to_ket(gkp_word(1, delta, space.cutoff()))?;
    let s = k0.dotc(&k1);
    let raw = s.norm();
    if raw >= 1.0 - 1e-12 {
        return Err(Error::NonOrthogonal { overlap: raw });
    }
    // S^{−1/2} for S = [[1, s], [s*, 1]]: eigenvalues 1 ± |s|.
    let a = 0.5 * ((1.0 + raw).powf(-0.5) + (1.0 - raw).powf(-0.5));
    let b = 0.5 * ((1.0 + raw).powf(-0.5) - (1.0 - raw).powf(-0.5));
    let phase = if raw > 0.0 { s / raw } else { Complex64::new(1.0, 0.0) };
    let o0 = &k0 * Complex64::new(a, 0.0) + &k1 * (phase.conj() * b);
    let o1 = &k1 * Complex64::new(a, 0.0) + &k0 * (phase * b);
    let mut code = BosonicCode::from_kets(CodeLabel::Gkp { delta }, space, o0, o1)?;
    code.raw_overlap = raw;
    Ok(code)
}

/// Builds a code from its label.
pub fn build(label: CodeLabel, space: FockSpace) -> Result<BosonicCode> {
    match label {
        CodeLabel::Cat { n, alpha } => cat_code(n, alpha, space),
        CodeLabel::Binomial { gap, kappa } => binomial_code(gap, kappa, space),
        CodeLabel::Gkp { delta } => gkp_code(delta, space),
    }
}

/// Smallest cutoff a code needs: `nκ+1` for binomial codes, the `1e−6` tail
/// point for cat codes and the `1e−8` tail point for GKP codes.
pub fn required_cutoff(label: CodeLabel) -> Result<usize> {
    match label {
        CodeLabel::Binomial { gap, kappa } => Ok(gap * kappa + 1),
        CodeLabel::Gkp { delta } => gkp_required_cutoff(delta),
        CodeLabel::Cat { alpha, .. } => {
            let mut n = 2;
            loop {
                let (_, tail) = crate::fock::coherent_ket_with_tail(FockSpace::new(n)?, alpha);
                if tail <= 1e-10 {
                    return Ok(n);
                }
                n += 1;
            }
        }
    }
}

/// Photon-number moments with respect to `C_L`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CodeMoments {
    /// `tr{C_L a†a}`.
    pub n: f64,
    /// `tr{C_L (a†a)²}`.
    pub n2: f64,
    /// `tr{C_L a²}`.
    pub a2: Complex64,
}

/// `(⟨a†a⟩, ⟨(a†a)²⟩, ⟨a²⟩)` with respect to `C_L`.
pub fn code_moments(code: &BosonicCode) -> CodeMoments {
    let a = FockOperator::annihilation(code.space());
    let a2 = a.matrix() * a.matrix();
    let c = code.codespace_identity();
    CodeMoments {
        n: code.number_trace(|n| n as f64),
        n2: code.number_trace(|n| (n * n) as f64),
        a2: crate::fock::trace_product(&c, &a2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn space(n: usize) -> FockSpace {
        FockSpace::new(n).unwrap()
    }

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn two_component_cat_is_opposite_parity() {
        let s = space(40);
        let code = cat_code(2, re(2.0), s).unwrap();
        assert_eq!(code.parity(), Parity::Opposite);
        let plus = coherent_ket(s, re(2.0)).unwrap() + coherent_ket(s, re(-2.0)).unwrap();
        let plus = &plus / Complex64::new(plus.norm(), 0.0);
        assert_abs_diff_eq!(plus.dotc(code.ket0()).norm(), 1.0, epsilon = 1e-12);
        let minus = coherent_ket(s, re(2.0)).unwrap() - coherent_ket(s, re(-2.0)).unwrap();
        let minus = &minus / Complex64::new(minus.norm(), 0.0);
        assert_abs_diff_eq!(minus.dotc(code.ket1()).norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn four_component_cat_supports() {
        let code = cat_code(4, re(1.5), space(40)).unwrap();
        assert_eq!(code.parity(), Parity::LikeEven);
        for (n, z) in code.ket0().iter().enumerate() {
            if n % 4 != 0 {
                assert_eq!(z.norm(), 0.0);
            }
        }
        for (n, z) in code.ket1().iter().enumerate() {
            if n % 4 != 2 {
                assert_eq!(z.norm(), 0.0);
            } else {
                assert!(z.norm() > 0.0 || n > 30);
            }
        }
    }

    #[test]
    fn ring_sum_matches_sector_projection() {
        let s = space(50);
        let alpha = Complex64::new(1.2, 0.7);
        let n = 6;
        let mut even = CVec::zeros(50);
        let mut alt = CVec::zeros(50);
        for k in 0..n {
            let w = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
            let c = coherent_ket(s, alpha * w).unwrap();
            even += &c;
            alt += &c * re(if k % 2 == 0 { 1.0 } else { -1.0 });
        }
        let code = cat_code(n, alpha, s).unwrap();
        assert_abs_diff_eq!(code.ket0().dotc(&even).norm(), even.norm(), epsilon = 1e-10);
        assert_abs_diff_eq!(code.ket1().dotc(&alt).norm(), alt.norm(), epsilon = 1e-10);
    }

    #[test]
    fn cat_six_moments() {
        let code = cat_code(6, re(1.916), space(60)).unwrap();
        assert_eq!(code.parity(), Parity::Opposite);
        let m = code_moments(&code);
        assert!((m.n - 4.0).abs() < 0.08, "{}", m.n);
        assert!((m.n2 - 20.0).abs() < 0.4, "{}", m.n2);
        assert!(m.a2.norm() < 1e-12);
    }

    #[test]
    fn odd_cat_rejected() {
        assert!(cat_code(3, re(1.0), space(30)).is_err());
        assert!(matches!(
            cat_code(2, re(9.0), space(30)),
            Err(Error::TailTooLarge { .. })
        ));
    }

    #[test]
    fn binomial_examples() {
        let s = space(60);
        let b24 = binomial_code(2, 4, s).unwrap();
        assert_eq!(b24.parity(), Parity::LikeEven);
        let m = code_moments(&b24);
        assert_abs_diff_eq!(m.n, 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.n2, 20.0, epsilon = 1e-12);
        assert_eq!(m.a2.norm(), 0.0);

        let b11 = binomial_code(1, 1, s).unwrap();
        assert_eq!(b11.ket0(), &s.ket(0).unwrap());
        assert_eq!(b11.ket1(), &s.ket(1).unwrap());
        assert_eq!(b11.parity(), Parity::Opposite);
        let m = code_moments(&b11);
        assert_eq!((m.n, m.n2), (0.5, 0.5));
        assert!(max_diff(&b11.codespace_identity(), 0, 0, 0.5));

        let b22 = binomial_code(2, 2, s).unwrap();
        let h = core::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(b22.ket0()[0].re, h, epsilon = 1e-15);
        assert_abs_diff_eq!(b22.ket0()[4].re, h, epsilon = 1e-15);
        assert_eq!(b22.ket1(), &s.ket(2).unwrap());
        assert_eq!(b22.parity(), Parity::LikeEven);
    }

    fn max_diff(m: &CMat, i: usize, j: usize, v: f64) -> bool {
        (m[(i, j)].re - v).abs() < 1e-15
    }

    #[test]
    fn binomial_cutoff_error() {
        assert_eq!(
            binomial_code(2, 4, space(8)),
            Err(Error::CutoffExceeded { needed: 9, cutoff: 8 })
        );
    }

    #[test]
    fn codespace_identity_has_unit_trace() {
        for code in [
            cat_code(2, re(2.0), space(60)).unwrap(),
            binomial_code(3, 3, space(60)).unwrap(),
        ] {
            assert_abs_diff_eq!(code.codespace_identity().trace().re, 1.0, epsilon = 1e-12);
            let m = code.compress(&CMat::identity(60, 60)).unwrap();
            assert_abs_diff_eq!(m.trace().re, 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn hermite_functions_are_normalized_on_a_grid() {
        // ∫ψ_m ψ_n dx = δ_mn by a dense Riemann sum.
        let h = 0.01;
        let mut gram = [[0.0; 4]; 4];
        let mut x = -12.0;
        while x < 12.0 {
            let psi = hermite_functions(x, 4);
            for m in 0..4 {
                for n in 0..4 {
                    gram[m][n] += h * psi[m] * psi[n];
                }
            }
            x += h;
        }
        for (m, row) in gram.iter().enumerate() {
            for (n, g) in row.iter().enumerate() {
                assert_abs_diff_eq!(*g, if m == n { 1.0 } else { 0.0 }, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn gkp_is_like_even() {
        let n = gkp_required_cutoff(0.3).unwrap();
        assert!(n > 60 && n < 160, "{n}");
        let code = gkp_code(0.3, space(n)).unwrap();
        assert_eq!(code.parity(), Parity::LikeEven);
        assert!(code.ket0().dotc(code.ket1()).norm() < 1e-12);
        assert!(code.raw_overlap() > 1e-5 && code.raw_overlap() < 1e-3);
        assert!(matches!(gkp_code(0.3, space(60)), Err(Error::CutoffExceeded { .. })));
    }

    #[test]
    fn gkp_small_delta_is_nearly_orthogonal() {
        let n = gkp_required_cutoff(0.2).unwrap();
        let code = gkp_code(0.2, space(n)).unwrap();
        assert!(code.raw_overlap() < 1e-6);
    }

    #[test]
    fn envelope_composes() {
        let s = space(20);
        let (d1, d2) = (0.3_f64, 0.4_f64);
        let e = |d: f64| FockOperator::number_power_diag(s, move |n| (-d * d * n as f64).exp());
        let twice = &e(d1) * &e(d2);
        let once = e((d1 * d1 + d2 * d2).sqrt());
        assert!(crate::fock::max_abs(&(twice.matrix() - once.matrix())) < 1e-15);
    }

    #[test]
    fn label_round_trip_text() {
        assert_eq!(CodeLabel::Binomial { gap: 2, kappa: 4 }.to_string(), "bin:n=2,kappa=4");
        assert_eq!(
            CodeLabel::Cat { n: 6, alpha: re(1.916) }.to_string(),
            "cat:n=6,alpha=1.916"
        );
        assert_eq!(CodeLabel::Gkp { delta: 0.3 }.to_string(), "gkp:delta=0.3");
    }
}
