//! Conditional-displacement / conditional-rotation gate sequences and a
//! seeded Nelder–Mead search over them.
//!
//! One layer is `CD_q(β_q) · CD_p(β_p) · CR(ϑ)` with
//! `CD_x(β) = exp(iβ x ⊗ m̂·σ)` and `CR(ϑ) = exp(iϑ a†a n̂·σ)`. The encoder is
//! `U_pre = G_L ⋯ G_1` and the decoder `U_post` has the same form inverted,
//! `U_post = U_pre(θ')†`, with its own parameters `θ'`. The CF interferometer
//! is the point `L = 1`, `β = 0`, `ϑ = ϑ' = π/2`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};
use core::fmt;
use core::str::FromStr;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use crate::channels::{KrausChannel, KrausTerms};
use crate::codes::BosonicCode;
use crate::fidelity::LogicalProcess;
use crate::fock::{CMat, CVec, FockOperator, FockSpace, ShiftOperator};
use crate::qubit::Axis;
use crate::suppression::{QubitNoise, SuppressionConfig};
use crate::{Error, Result};

/// Starts per optimization.
pub const DEFAULT_STARTS: usize = 8;
/// Objective evaluations per start.
pub const DEFAULT_BUDGET: usize = 2000;
/// Simplex spread in objective value accepted as convergence.
pub const SIMPLEX_FTOL: f64 = 1e-12;

/// Parameters of one layer.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Layer {
    /// Conditional displacement along `q`.
    pub beta_q: f64,
    /// Conditional displacement along `p`.
    pub beta_p: f64,
    /// Conditional rotation angle.
    pub theta: f64,
}

impl Layer {
    /// The CF layer: no displacement, `ϑ = π/2`.
    pub const CF: Self = Self {
        beta_q: 0.0,
        beta_p: 0.0,
        theta: FRAC_PI_2,
    };
}

/// Encoder and decoder layers plus the qubit axes of the two gate kinds.
#[derive(Clone, Debug, PartialEq)]
pub struct GateSequence {
    /// Encoder layers `G_1 … G_L`.
    pub pre: Vec<Layer>,
    /// Decoder parameters `θ'`.
    pub post: Vec<Layer>,
    /// Control axis of the conditional displacements.
    pub cd_axis: Axis,
    /// Axis of the conditional rotations.
    pub cr_axis: Axis,
}

impl GateSequence {
    /// `L` layers with every parameter zero.
    pub fn zeros(layers: usize) -> Self {
        Self {
            pre: vec![Layer::default(); layers],
            post: vec![Layer::default(); layers],
            cd_axis: Axis::Z,
            cr_axis: Axis::X,
        }
    }

    /// The CF interferometer embedded in `L` layers: the first layer is CF,
    /// the others are identities.
    pub fn cf(layers: usize) -> Self {
        let mut s = Self::zeros(layers.max(1));
        s.pre[0] = Layer::CF;
        s.post[0] = Layer::CF;
        s
    }

    /// Layer count.
    pub fn layers(&self) -> usize {
        self.pre.len()
    }

    /// Flattened parameters, encoder then decoder, `(β_q, β_p, ϑ)` per layer.
    pub fn params(&self) -> Vec<f64> {
        self.pre
            .iter()
            .chain(&self.post)
            .flat_map(|l| [l.beta_q, l.beta_p, l.theta])
            .collect()
    }

    /// Inverse of [`GateSequence::params`].
    pub fn from_params(params: &[f64], cd_axis: Axis, cr_axis: Axis) -> Result<Self> {
        if params.is_empty() || params.len() % 6 != 0 {
            return Err(Error::InvalidParameter(format!(
                "{} parameters is not a multiple of 6",
                params.len()
            )));
        }
        let layers: Vec<Layer> = params
            .chunks(3)
            .map(|c| Layer {
                beta_q: c[0],
                beta_p: c[1],
                theta: c[2],
            })
            .collect();
        let half = layers.len() / 2;
        Ok(Self {
            pre: layers[..half].to_vec(),
            post: layers[half..].to_vec(),
            cd_axis,
            cr_axis,
        })
    }

    /// Dense `(U_pre, U_post)` on the mode and one qubit.
    pub fn unitaries(&self, space: FockSpace) -> Result<(CMat, CMat)> {
        let g = Generators::new(space);
        let n = 2 * space.cutoff();
        let mut pre = CMat::identity(n, n);
        g.encode(&self.pre, self.cd_axis, self.cr_axis, &mut pre);
        let mut post_dag = CMat::identity(n, n);
        g.encode(&self.post, self.cd_axis, self.cr_axis, &mut post_dag);
        Ok((pre, post_dag.adjoint()))
    }
}

impl fmt::Display for GateSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.cd_axis.components();
        let [d, e, g] = self.cr_axis.components();
        write!(f, "L={};cd_axis={a},{b},{c};cr_axis={d},{e},{g}", self.layers())?;
        for (tag, layers) in [("pre", &self.pre), ("post", &self.post)] {
            for (i, l) in layers.iter().enumerate() {
                write!(
                    f,
                    ";{tag}{i}:beta_q={:e},beta_p={:e},theta={:e}",
                    l.beta_q, l.beta_p, l.theta
                )?;
            }
        }
        Ok(())
    }
}

impl FromStr for GateSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |what: &str| Error::InvalidParameter(format!("gate sequence: {what}"));
        let mut parts = s.split(';');
        let layers: usize = parts
            .next()
            .and_then(|p| p.strip_prefix("L="))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad("missing L"))?;
        let axis = |p: Option<&str>, key: &str| -> Result<Axis> {
            let v = p.and_then(|p| p.strip_prefix(key)).ok_or_else(|| bad(key))?;
            let c: Vec<f64> = v
                .split(',')
                .map(|x| x.parse::<f64>())
                .collect::<core::result::Result<_, _>>()
                .map_err(|_| bad(key))?;
            if c.len() != 3 {
                return Err(bad(key));
            }
            Axis::new([c[0], c[1], c[2]])
        };
        let cd_axis = axis(parts.next(), "cd_axis=")?;
        let cr_axis = axis(parts.next(), "cr_axis=")?;
        let mut seq = GateSequence {
            pre: Vec::new(),
            post: Vec::new(),
            cd_axis,
            cr_axis,
        };
        for p in parts {
            let (head, body) = p.split_once(':').ok_or_else(|| bad(p))?;
            let mut layer = Layer::default();
            for kv in body.split(',') {
                let (k, v) = kv.split_once('=').ok_or_else(|| bad(kv))?;
                let v: f64 = v.parse().map_err(|_| bad(kv))?;
                match k {
                    "beta_q" => layer.beta_q = v,
                    "beta_p" => layer.beta_p = v,
                    "theta" => layer.theta = v,
                    _ => return Err(bad(k)),
                }
            }
            let (list, idx) = if let Some(i) = head.strip_prefix("post") {
                (&mut seq.post, i)
            } else if let Some(i) = head.strip_prefix("pre") {
                (&mut seq.pre, i)
            } else {
                return Err(bad(head));
            };
            if idx.parse::<usize>().ok() != Some(list.len()) {
                return Err(bad(head));
            }
            list.push(layer);
        }
        if seq.pre.len() != layers || seq.post.len() != layers {
            return Err(bad("layer count"));
        }
        Ok(seq)
    }
}

/// Eigendecompositions of the truncated quadratures.
#[derive(Clone, Debug)]
struct Generators {
    n: usize,
    q: (CMat, Vec<f64>),
    p: (CMat, Vec<f64>),
}

impl Generators {
    fn new(space: FockSpace) -> Self {
        let eig = |m: CMat| {
            let e = SymmetricEigen::new(m);
            (e.eigenvectors, e.eigenvalues.iter().copied().collect())
        };
        Self {
            n: space.cutoff(),
            q: eig(FockOperator::position(space).into_matrix()),
            p: eig(FockOperator::momentum(space).into_matrix()),
        }
    }

    /// `exp(iβ X)` from `X = V Λ V†`.
    fn exp(&self, (v, lambda): &(CMat, Vec<f64>), beta: f64) -> CMat {
        let mut scaled = v.clone();
        for (j, l) in lambda.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, beta * l);
            for i in 0..self.n {
                scaled[(i, j)] *= phase;
            }
        }
        scaled * v.adjoint()
    }

    /// Applies `exp(iβ X ⊗ m̂·σ)` to the columns of `x` (hybrid index `2n + s`).
    fn conditional_displacement(&self, gen: &(CMat, Vec<f64>), beta: f64, axis: Axis, x: &mut CMat) {
        if beta == 0.0 {
            return;
        }
        let n = self.n;
        let m = x.ncols();
        let sigma = axis.pauli();
        let half = Complex64::new(0.5, 0.0);
        let rows = |s: usize| -> CMat { CMat::from_fn(n, m, |i, j| x[(2 * i + s, j)]) };
        let blocks = [rows(0), rows(1)];
        let mut out = [CMat::zeros(n, m), CMat::zeros(n, m)];
        for sign in [1.0, -1.0] {
            let e = self.exp(gen, sign * beta);
            // Projector (1 ± m̂·σ)/2.
            let proj = |s: usize, t: usize| {
                let id = if s == t { 1.0 } else { 0.0 };
                (Complex64::new(id, 0.0) + sigma[(s, t)] * sign) * half
            };
            for (s, o) in out.iter_mut().enumerate() {
                let (c0, c1) = (proj(s, 0), proj(s, 1));
                if c0.norm() == 0.0 && c1.norm() == 0.0 {
                    continue;
                }
                let y = &blocks[0] * c0 + &blocks[1] * c1;
                *o += &e * y;
            }
        }
        for i in 0..n {
            for j in 0..m {
                x[(2 * i, j)] = out[0][(i, j)];
                x[(2 * i + 1, j)] = out[1][(i, j)];
            }
        }
    }

    /// Applies `exp(iϑ a†a n̂·σ)` to the columns of `x`.
    fn conditional_rotation(&self, theta: f64, axis: Axis, x: &mut CMat) {
        for k in 0..self.n {
            let r = axis.rotation(theta * k as f64);
            for j in 0..x.ncols() {
                let (a, b) = (x[(2 * k, j)], x[(2 * k + 1, j)]);
                x[(2 * k, j)] = r[(0, 0)] * a + r[(0, 1)] * b;
                x[(2 * k + 1, j)] = r[(1, 0)] * a + r[(1, 1)] * b;
            }
        }
    }

    /// `x ← G_L ⋯ G_1 x`.
    fn encode(&self, layers: &[Layer], cd_axis: Axis, cr_axis: Axis, x: &mut CMat) {
        for l in layers {
            self.conditional_rotation(l.theta, cr_axis, x);
            self.conditional_displacement(&self.p, l.beta_p, cd_axis, x);
            self.conditional_displacement(&self.q, l.beta_q, cd_axis, x);
        }
    }
}

/// A code, a noise model and a layer count to optimize over.
#[derive(Clone, Debug)]
pub struct OptimizeProblem {
    code: BosonicCode,
    ancilla: CVec,
    layers: usize,
    cd_axis: Axis,
    cr_axis: Axis,
    mode_terms: Vec<ShiftOperator>,
    qubit_terms: Vec<CMat>,
    defect: f64,
    gens: Generators,
}

impl OptimizeProblem {
    /// Ancilla starts (and is heralded) in the CF ancilla state of the code.
    pub fn new(
        code: &BosonicCode,
        cv_noise: &KrausChannel,
        dv_noise: Option<QubitNoise>,
        layers: usize,
    ) -> Result<Self> {
        if layers == 0 {
            return Err(Error::InvalidParameter("at least one layer is needed".into()));
        }
        let mode_terms = match cv_noise.terms() {
            KrausTerms::Mode(t) => t.clone(),
            KrausTerms::Qubit(_) => return Err(Error::InvalidParameter("mode channel expected".into())),
        };
        if let Some(k) = mode_terms.first() {
            if k.space() != code.space() {
                return Err(Error::DimensionMismatch {
                    expected: code.space().cutoff(),
                    found: k.space().cutoff(),
                });
            }
        }
        let mut defect = cv_noise.cptp_defect();
        let qubit_terms = match dv_noise {
            Some(n) => {
                let ch = n.channel()?;
                defect = defect.max(ch.cptp_defect());
                match ch.terms() {
                    KrausTerms::Qubit(t) => t.clone(),
                    KrausTerms::Mode(_) => unreachable!("qubit noise builds qubit terms"),
                }
            }
            None => vec![CMat::identity(2, 2)],
        };
        Ok(Self {
            ancilla: SuppressionConfig::for_code(code).ancilla,
            code: code.clone(),
            layers,
            cd_axis: Axis::Z,
            cr_axis: Axis::X,
            mode_terms,
            qubit_terms,
            defect,
            gens: Generators::new(code.space()),
        })
    }

    /// Same problem with different ancilla noise.
    pub fn with_dv_noise(&self, dv_noise: Option<QubitNoise>) -> Result<Self> {
        let mut out = self.clone();
        out.qubit_terms = match dv_noise {
            Some(n) => match n.channel()?.terms() {
                KrausTerms::Qubit(t) => t.clone(),
                KrausTerms::Mode(_) => unreachable!("qubit noise builds qubit terms"),
            },
            None => vec![CMat::identity(2, 2)],
        };
        Ok(out)
    }

    /// Layer count.
    pub fn layers(&self) -> usize {
        self.layers
    }

    /// The code.
    pub fn code(&self) -> &BosonicCode {
        &self.code
    }

    /// `|ψ⟩ ⊗ |ancilla⟩` for each codeword, as the two columns of a matrix.
    fn codeword_columns(&self) -> CMat {
        let n = self.code.space().cutoff();
        let mut x = CMat::zeros(2 * n, 2);
        for mu in 0..2 {
            let k = self.code.ket(mu);
            for i in 0..n {
                for s in 0..2 {
                    x[(2 * i + s, mu)] = k[i] * self.ancilla[s];
                }
            }
        }
        x
    }

    /// Logical process of a sequence.
    pub fn process(&self, seq: &GateSequence) -> Result<LogicalProcess> {
        if seq.layers() != self.layers {
            return Err(Error::DimensionMismatch {
                expected: self.layers,
                found: seq.layers(),
            });
        }
        let n = self.code.space().cutoff();
        let mut psi = self.codeword_columns();
        self.gens.encode(&seq.pre, self.cd_axis, self.cr_axis, &mut psi);
        // M† = U_post† (1 ⊗ |a⟩): columns e_k ⊗ |a⟩ pushed through the
        // decoder parameters.
        let mut m_dag = CMat::zeros(2 * n, n);
        for k in 0..n {
            m_dag[(2 * k, k)] = self.ancilla[0];
            m_dag[(2 * k + 1, k)] = self.ancilla[1];
        }
        self.gens.encode(&seq.post, self.cd_axis, self.cr_axis, &mut m_dag);

        let terms = self.mode_terms.len() * self.qubit_terms.len();
        let mut images = CMat::zeros(2 * n, 2 * terms);
        let mut col = 0;
        for k in &self.mode_terms {
            let (shift, w) = (k.shift(), k.weights());
            for e in &self.qubit_terms {
                for mu in 0..2 {
                    for i in 0..n {
                        if w[i] == 0.0 {
                            continue;
                        }
                        let t = (i as isize + shift) as usize;
                        let (a, b) = (psi[(2 * i, mu)], psi[(2 * i + 1, mu)]);
                        images[(2 * t, col + mu)] = (e[(0, 0)] * a + e[(0, 1)] * b) * w[i];
                        images[(2 * t + 1, col + mu)] = (e[(1, 0)] * a + e[(1, 1)] * b) * w[i];
                    }
                }
                col += 2;
            }
        }
        // Heralded mode images M K ψ_μ, one column per (term, μ).
        let out = m_dag.adjoint() * images;
        let kets = [self.code.ket0(), self.code.ket1()];
        let proj = CMat::from_fn(2, n, |a, i| kets[a][i].conj()) * &out;

        let zero = Complex64::new(0.0, 0.0);
        let mut t = [[[[zero; 2]; 2]; 2]; 2];
        let mut s = [[zero; 2]; 2];
        for term in 0..terms {
            let c = 2 * term;
            for mu in 0..2 {
                for nu in 0..2 {
                    s[mu][nu] += out.column(c + nu).dotc(&out.column(c + mu));
                    for a in 0..2 {
                        for b in 0..2 {
                            t[a][b][mu][nu] += proj[(a, c + mu)] * proj[(b, c + nu)].conj();
                        }
                    }
                }
            }
        }
        Ok(LogicalProcess::from_parts(t, s, self.defect))
    }

    /// Average heralded fidelity; failures count as zero.
    pub fn objective(&self, seq: &GateSequence) -> f64 {
        self.process(seq)
            .and_then(|p| p.average_fidelity())
            .map(|a| a.value)
            .ok()
            .filter(|v| v.is_finite())
            .unwrap_or(0.0)
    }

    fn objective_params(&self, params: &[f64]) -> f64 {
        match GateSequence::from_params(params, self.cd_axis, self.cr_axis) {
            Ok(seq) => self.objective(&seq),
            Err(_) => 0.0,
        }
    }

    /// Initial point of a start: CF for start 0, seeded random otherwise.
    pub fn initial_point(&self, seed: u64, start: usize) -> GateSequence {
        let mut seq = GateSequence::cf(self.layers);
        seq.cd_axis = self.cd_axis;
        seq.cr_axis = self.cr_axis;
        if start == 0 {
            return seq;
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(start as u64);
        let normal = Normal::new(0.0, 0.3).expect("finite standard deviation");
        for l in seq.pre.iter_mut().chain(seq.post.iter_mut()) {
            l.beta_q = normal.sample(&mut rng);
            l.beta_p = normal.sample(&mut rng);
            l.theta = rng.random_range(-PI..PI);
        }
        seq
    }
}

/// Search settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OptimizeSettings {
    /// Number of starts; start 0 is the CF point.
    pub starts: usize,
    /// Objective evaluations per start.
    pub budget: usize,
    /// Seed of the random starts.
    pub seed: u64,
}

impl Default for OptimizeSettings {
    fn default() -> Self {
        Self {
            starts: DEFAULT_STARTS,
            budget: DEFAULT_BUDGET,
            seed: 0,
        }
    }
}

/// Outcome of one start or of a whole search.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizeResult {
    /// Best sequence found.
    pub sequence: GateSequence,
    /// Its average fidelity.
    pub value: f64,
    /// Objective evaluations used.
    pub evaluations: usize,
    /// False when the budget ran out before the simplex collapsed.
    pub converged: bool,
    /// Index of the start that produced the result.
    pub start: usize,
}

/// Runs one start.
pub fn optimize_start(problem: &OptimizeProblem, settings: OptimizeSettings, start: usize) -> OptimizeResult {
    let x0 = problem.initial_point(settings.seed, start).params();
    let steps: Vec<f64> = x0
        .iter()
        .enumerate()
        .map(|(i, _)| if i % 3 == 2 { 0.3 } else { 0.2 })
        .collect();
    let nm = nelder_mead(
        |x| 1.0 - problem.objective_params(x),
        &x0,
        &steps,
        settings.budget,
        SIMPLEX_FTOL,
    );
    OptimizeResult {
        sequence: GateSequence::from_params(&nm.x, problem.cd_axis, problem.cr_axis)
            .expect("parameter count is preserved"),
        value: 1.0 - nm.f,
        evaluations: nm.evaluations,
        converged: nm.converged,
        start,
    }
}

/// Best of several start results; ties go to the lowest start index.
pub fn best_result(results: Vec<OptimizeResult>) -> Option<OptimizeResult> {
    results.into_iter().fold(None, |best, r| match best {
        Some(b) if b.value > r.value || (b.value == r.value && b.start <= r.start) => Some(b),
        _ => Some(r),
    })
}

/// Runs every start in order and keeps the best.
pub fn optimize_sequence(problem: &OptimizeProblem, settings: OptimizeSettings) -> Result<OptimizeResult> {
    let results = (0..settings.starts.max(1))
        .map(|s| optimize_start(problem, settings, s))
        .collect();
    best_result(results).ok_or_else(|| Error::InvalidParameter("no starts".into()))
}

/// Result of a simplex minimization.
#[derive(Clone, Debug, PartialEq)]
pub struct NelderMead {
    /// Best point.
    pub x: Vec<f64>,
    /// Objective at `x`.
    pub f: f64,
    /// Objective evaluations used.
    pub evaluations: usize,
    /// True when the simplex spread fell below the tolerance.
    pub converged: bool,
}

/// Minimizes `f` from `x0` with initial simplex steps `steps`, standard
/// coefficients (1, 2, ½, ½) and at most `budget` evaluations.
pub fn nelder_mead(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    steps: &[f64],
    budget: usize,
    ftol: f64,
) -> NelderMead {
    let dim = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let f0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), f0));
    for i in 0..dim {
        if evals >= budget {
            break;
        }
        let mut x = x0.to_vec();
        x[i] += steps[i];
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }
    let sort = |s: &mut Vec<(Vec<f64>, f64)>| s.sort_by(|a, b| a.1.total_cmp(&b.1));
    sort(&mut simplex);
    if simplex.len() < dim + 1 {
        let (x, fx) = simplex.swap_remove(0);
        return NelderMead {
            x,
            f: fx,
            evaluations: evals,
            converged: false,
        };
    }
    let point = |c: &[f64], d: &[f64], t: f64| -> Vec<f64> { c.iter().zip(d).map(|(a, b)| a + t * (b - a)).collect() };
    let mut converged = false;
    while evals < budget {
        if simplex[dim].1 - simplex[0].1 <= ftol {
            converged = true;
            break;
        }
        let mut centroid = vec![0.0; dim];
        for (x, _) in &simplex[..dim] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / dim as f64;
            }
        }
        let worst = simplex[dim].0.clone();
        let xr = point(&centroid, &worst, -1.0);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = point(&centroid, &worst, -2.0);
            let fe = if evals < budget {
                eval(&xe, &mut evals)
            } else {
                f64::INFINITY
            };
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
        } else {
            let outside = fr < simplex[dim].1;
            let xc = if outside {
                point(&centroid, &xr, 0.5)
            } else {
                point(&centroid, &worst, 0.5)
            };
            let fc = if evals < budget {
                eval(&xc, &mut evals)
            } else {
                f64::INFINITY
            };
            if fc < if outside { fr } else { simplex[dim].1 } {
                simplex[dim] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    if evals >= budget {
                        break;
                    }
                    let x = point(&best, &entry.0, 0.5);
                    let v = eval(&x, &mut evals);
                    *entry = (x, v);
                }
            }
        }
        sort(&mut simplex);
    }
    let (x, fx) = simplex.swap_remove(0);
    NelderMead {
        x,
        f: fx,
        evaluations: evals,
        converged,
    }
}

/// Human-readable summary of a result.
pub fn describe(result: &OptimizeResult) -> String {
    format!(
        "value={:.12} start={} evaluations={} converged={} sequence={}",
        result.value, result.start, result.evaluations, result.converged, result.sequence
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{loss_channel, thermal_channel, Factor};
    use crate::codes::binomial_code;
    use crate::fidelity::HeraldedMap;
    use crate::fock::{coherent_ket, max_abs};
    use crate::hybrid::{project_qubits, HybridLayout};
    use crate::qubit;
    use crate::suppression::{suppression_unitary, SuppressionProtocol};
    use approx::assert_abs_diff_eq;

    fn space(n: usize) -> FockSpace {
        FockSpace::new(n).unwrap()
    }

    fn sample_sequence(layers: usize) -> GateSequence {
        let mut s = GateSequence::zeros(layers);
        for (i, l) in s.pre.iter_mut().chain(s.post.iter_mut()).enumerate() {
            let x = i as f64 + 1.0;
            *l = Layer {
                beta_q: 0.1 * x.sin(),
                beta_p: 0.15 * x.cos(),
                theta: 0.7 * x,
            };
        }
        s
    }

    #[test]
    fn zero_parameters_are_identity() {
        let (pre, post) = GateSequence::zeros(2).unitaries(space(12)).unwrap();
        assert!(max_abs(&(pre - CMat::identity(24, 24))) < 1e-12);
        assert!(max_abs(&(post - CMat::identity(24, 24))) < 1e-12);
    }

    #[test]
    fn cf_point_is_the_cf_gate() {
        let s = space(16);
        let (pre, post) = GateSequence::cf(1).unitaries(s).unwrap();
        let u = suppression_unitary(FRAC_PI_2, Axis::X, s).unwrap().to_dense();
        assert!(max_abs(&(&pre - &u)) < 1e-12);
        assert!(max_abs(&(post - u.adjoint())) < 1e-12);
    }

    #[test]
    fn gates_are_unitary() {
        let (pre, post) = sample_sequence(3).unitaries(space(30)).unwrap();
        for u in [pre, post] {
            assert!(max_abs(&(u.adjoint() * &u - CMat::identity(60, 60))) < 1e-10);
        }
    }

    #[test]
    fn conditional_displacement_moves_vacuum() {
        let s = space(40);
        let g = Generators::new(s);
        let beta = 0.8;
        for (bit, sign) in [(0usize, 1.0), (1, -1.0)] {
            let mut x = CMat::zeros(80, 1);
            x[(bit, 0)] = Complex64::new(1.0, 0.0);
            g.conditional_displacement(&g.q, beta, Axis::Z, &mut x);
            // exp(iβq)|0⟩ = |iβ/√2⟩.
            let target = coherent_ket(s, Complex64::new(0.0, sign * beta / 2f64.sqrt())).unwrap();
            let overlap: Complex64 = (0..40).map(|n| target[n].conj() * x[(2 * n + bit, 0)]).sum();
            assert_abs_diff_eq!(overlap.norm(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn text_round_trip() {
        let seq = sample_sequence(2);
        let text = seq.to_string();
        let back: GateSequence = text.parse().unwrap();
        assert_eq!(back, seq);
        assert!("L=1;cd_axis=0,0,1".parse::<GateSequence>().is_err());
        assert!("L=2;cd_axis=0,0,1;cr_axis=1,0,0;pre0:beta_q=0,beta_p=0,theta=0"
            .parse::<GateSequence>()
            .is_err());
    }

    #[test]
    fn fast_process_matches_dense_map() {
        let s = space(30);
        let code = binomial_code(2, 4, s).unwrap();
        let ch = thermal_channel(0.05, 0.5, s).unwrap();
        let dv = QubitNoise::Damping(0.2);
        let problem = OptimizeProblem::new(&code, &ch, Some(dv), 2).unwrap();
        let seq = sample_sequence(2);
        let fast = problem.process(&seq).unwrap();

        let layout = HybridLayout::new(s, 1).unwrap();
        let (pre, post) = seq.unitaries(s).unwrap();
        let a = qubit::ket(0);
        let dv_ch = dv.channel().unwrap();
        let map = |x: &CMat| -> Result<CMat> {
            let mut y = &pre * x.kronecker(&(&a * a.adjoint())) * pre.adjoint();
            y = ch.apply_to(&y, layout, Factor::Mode)?;
            y = dv_ch.apply_to(&y, layout, Factor::Qubit(0))?;
            y = &post * y * post.adjoint();
            Ok(project_qubits(layout, &y, &[0], &a)?.1)
        };
        let dense = LogicalProcess::new(&code, &map).unwrap();
        assert!(fast.distance(&dense) < 1e-12, "{}", fast.distance(&dense));
    }

    #[test]
    fn cf_point_reproduces_protocol() {
        let s = space(40);
        let code = binomial_code(2, 4, s).unwrap();
        let ch = loss_channel(0.05, s, 12).unwrap();
        let problem = OptimizeProblem::new(&code, &ch, None, 1).unwrap();
        let fast = problem.process(&GateSequence::cf(1)).unwrap();
        let proto = SuppressionProtocol::new(s, ch, SuppressionConfig::default()).unwrap();
        let slow = LogicalProcess::new(&code, &proto).unwrap();
        assert!(fast.distance(&slow) < 1e-12);
        assert!(proto.truncation_defect() < 1e-8);
    }

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let r = nelder_mead(
            |x| (x[0] - 1.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2),
            &[0.0, 0.0],
            &[0.5, 0.5],
            2000,
            1e-16,
        );
        assert!(r.converged);
        assert_abs_diff_eq!(r.x[0], 1.0, epsilon = 1e-5);
        assert_abs_diff_eq!(r.x[1], -2.0, epsilon = 1e-5);
        let short = nelder_mead(|x| x[0] * x[0], &[5.0], &[0.1], 5, 1e-16);
        assert!(!short.converged);
        assert!(short.evaluations <= 5);
    }

    #[test]
    fn noiseless_optimum_is_perfect() {
        let s = space(20);
        let code = binomial_code(2, 4, s).unwrap();
        let problem = OptimizeProblem::new(&code, &KrausChannel::mode_identity(s), None, 1).unwrap();
        let settings = OptimizeSettings {
            starts: 2,
            budget: 50,
            seed: 3,
        };
        let r = optimize_sequence(&problem, settings).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(problem.objective(&GateSequence::zeros(1)), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn search_is_deterministic_and_not_below_cf() {
        let s = space(24);
        let code = binomial_code(2, 4, s).unwrap();
        let ch = loss_channel(0.05, s, 12).unwrap();
        let problem = OptimizeProblem::new(&code, &ch, None, 1).unwrap();
        let settings = OptimizeSettings {
            starts: 2,
            budget: 60,
            seed: 11,
        };
        let a = optimize_sequence(&problem, settings).unwrap();
        let b = optimize_sequence(&problem, settings).unwrap();
        assert_eq!(a, b);
        assert!(a.value >= problem.objective(&GateSequence::cf(1)) - 1e-12);
        assert_ne!(problem.initial_point(11, 1), problem.initial_point(11, 2));
    }
}
