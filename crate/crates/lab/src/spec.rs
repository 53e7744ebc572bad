//! Specifier grammar and sweep settings.
//!
//! ```text
//! code   := cat:n=<even>,alpha=<real> | bin:n=<gap>,kappa=<order> | gkp:delta=<real>
//! noise  := loss:eta=<r> | thermal:eta=<r>,nbar=<r> | gdn:eta=<r>
//! dv     := damping | depolarizing | damp:p=<r> | depol:eta=<r>
//! sweep  := (p|eta|alpha):<start>:<stop>:<step>
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cfsupp::channels::BosonicNoise;
use cfsupp::codes::CodeLabel;
use cfsupp::communication::Herald;
use cfsupp::optimize::{DEFAULT_BUDGET, DEFAULT_STARTS};
use cfsupp::suppression::{QubitNoise, Variant};
use cfsupp::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::LabError;

/// Cutoff used when neither the user nor the code asks for more.
pub const DEFAULT_CUTOFF: usize = 60;

fn key_values<'a>(body: &'a str, what: &str, allowed: &[&str]) -> Result<Vec<(&'a str, &'a str)>, LabError> {
    let mut out: Vec<(&str, &str)> = Vec::new();
    for kv in body.split(',').filter(|s| !s.is_empty()) {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| LabError::spec(format!("{what}: expected key=value, got `{kv}`")))?;
        let k = k.trim();
        if !allowed.contains(&k) {
            return Err(LabError::spec(format!("{what}: unknown key `{k}`")));
        }
        if out.iter().any(|(seen, _)| *seen == k) {
            return Err(LabError::spec(format!("{what}: duplicate key `{k}`")));
        }
        out.push((k, v.trim()));
    }
    Ok(out)
}

fn required<T: FromStr>(kvs: &[(&str, &str)], key: &str, what: &str) -> Result<T, LabError> {
    let v = kvs
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| LabError::spec(format!("{what}: missing `{key}`")))?;
    v.parse()
        .map_err(|_| LabError::spec(format!("{what}: cannot parse {key}=`{v}`")))
}

fn finite(x: f64, what: &str) -> Result<f64, LabError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(LabError::spec(format!("{what} must be finite")))
    }
}

/// Parses a code specifier such as `cat:n=6,alpha=1.916`.
pub fn parse_code(s: &str) -> Result<CodeLabel, LabError> {
    let (family, body) = s.split_once(':').unwrap_or((s, ""));
    match family.trim() {
        "cat" => {
            let kv = key_values(body, "cat", &["n", "alpha"])?;
            let n: usize = required(&kv, "n", "cat")?;
            let alpha = finite(required(&kv, "alpha", "cat")?, "alpha")?;
            if n < 2 || n % 2 != 0 {
                return Err(LabError::spec(format!("cat: n must be even and at least 2, got {n}")));
            }
            Ok(CodeLabel::Cat {
                n,
                alpha: Complex64::new(alpha, 0.0),
            })
        }
        "bin" => {
            let kv = key_values(body, "bin", &["n", "kappa"])?;
            let gap: usize = required(&kv, "n", "bin")?;
            let kappa: usize = required(&kv, "kappa", "bin")?;
            if gap == 0 || kappa == 0 {
                return Err(LabError::spec("bin: n and kappa must be positive"));
            }
            Ok(CodeLabel::Binomial { gap, kappa })
        }
        "gkp" => {
            let kv = key_values(body, "gkp", &["delta"])?;
            let delta = finite(required(&kv, "delta", "gkp")?, "delta")?;
            if !(delta > 0.0 && delta < 1.0) {
                return Err(LabError::spec(format!("gkp: delta must be in (0, 1), got {delta}")));
            }
            Ok(CodeLabel::Gkp { delta })
        }
        other => Err(LabError::spec(format!("unknown code family `{other}`"))),
    }
}

/// Parses a noise specifier such as `thermal:eta=0.05,nbar=0.5`.
pub fn parse_noise(s: &str) -> Result<BosonicNoise, LabError> {
    let (kind, body) = s.split_once(':').unwrap_or((s, ""));
    let noise = match kind.trim() {
        "loss" => {
            let kv = key_values(body, "loss", &["eta"])?;
            BosonicNoise::Loss {
                eta: finite(required(&kv, "eta", "loss")?, "eta")?,
            }
        }
        "thermal" => {
            let kv = key_values(body, "thermal", &["eta", "nbar"])?;
            BosonicNoise::Thermal {
                eta: finite(required(&kv, "eta", "thermal")?, "eta")?,
                nbar: finite(required(&kv, "nbar", "thermal")?, "nbar")?,
            }
        }
        "gdn" => {
            let kv = key_values(body, "gdn", &["eta"])?;
            BosonicNoise::Gdn {
                eta: finite(required(&kv, "eta", "gdn")?, "eta")?,
            }
        }
        other => return Err(LabError::spec(format!("unknown noise model `{other}`"))),
    };
    noise
        .gain_loss()
        .map_err(|e| LabError::spec(format!("noise `{s}`: {e}")))?;
    Ok(noise)
}

/// Noise specifier text for a model.
pub fn noise_text(noise: BosonicNoise) -> String {
    match noise {
        BosonicNoise::Loss { eta } => format!("loss:eta={eta}"),
        BosonicNoise::Thermal { eta, nbar } => format!("thermal:eta={eta},nbar={nbar}"),
        BosonicNoise::Gdn { eta } => format!("gdn:eta={eta}"),
    }
}

/// Kind of ancilla (or Bell pair) noise controlled by `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DvKind {
    /// Composite amplitude and phase damping.
    #[default]
    Damping,
    /// Depolarizing noise.
    Depolarizing,
}

impl DvKind {
    /// Qubit noise of strength `p`, or none at `p = 0`.
    pub fn at(self, p: f64) -> Option<QubitNoise> {
        if p == 0.0 {
            return None;
        }
        Some(match self {
            Self::Damping => QubitNoise::Damping(p),
            Self::Depolarizing => QubitNoise::Depolarizing(p),
        })
    }
}

/// Parses a qubit noise specifier; the strength is present for the
/// `damp:p=` and `depol:eta=` forms.
pub fn parse_dv(s: &str) -> Result<(DvKind, Option<f64>), LabError> {
    let (kind, body) = s.split_once(':').unwrap_or((s, ""));
    let (kind, key) = match kind.trim() {
        "damping" if body.is_empty() => return Ok((DvKind::Damping, None)),
        "depolarizing" if body.is_empty() => return Ok((DvKind::Depolarizing, None)),
        "damp" => (DvKind::Damping, "p"),
        "depol" => (DvKind::Depolarizing, "eta"),
        _ => return Err(LabError::spec(format!("unknown qubit noise `{s}`"))),
    };
    let kv = key_values(body, kind_name(kind), &[key])?;
    let p: f64 = required(&kv, key, kind_name(kind))?;
    if !(0.0..=1.0).contains(&p) {
        return Err(LabError::spec(format!("qubit noise `{s}`: strength outside [0, 1]")));
    }
    Ok((kind, Some(p)))
}

fn kind_name(kind: DvKind) -> &'static str {
    match kind {
        DvKind::Damping => "damp",
        DvKind::Depolarizing => "depol",
    }
}

/// Swept quantity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepVar {
    /// Qubit damping (or depolarizing) strength.
    P,
    /// Bosonic noise rate.
    Eta,
    /// Cat amplitude.
    Alpha,
}

impl fmt::Display for SweepVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::P => "p",
            Self::Eta => "eta",
            Self::Alpha => "alpha",
        })
    }
}

/// Inclusive arithmetic grid `start, start + step, …, stop`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sweep {
    /// Swept quantity.
    pub var: SweepVar,
    /// First value.
    pub start: f64,
    /// Last value (inclusive when hit within rounding).
    pub stop: f64,
    /// Increment.
    pub step: f64,
}

impl Sweep {
    /// Grid values, rounded to 12 decimals so that reruns print identically.
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| ((self.start + i as f64 * self.step) * 1e12).round() / 1e12)
            .collect()
    }
}

impl FromStr for Sweep {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self, LabError> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 4 {
            return Err(LabError::spec(format!("sweep `{s}`: expected var:start:stop:step")));
        }
        let var = match parts[0] {
            "p" => SweepVar::P,
            "eta" => SweepVar::Eta,
            "alpha" => SweepVar::Alpha,
            v => return Err(LabError::spec(format!("sweep `{s}`: unknown variable `{v}`"))),
        };
        let num = |t: &str| -> Result<f64, LabError> {
            let x: f64 = t
                .parse()
                .map_err(|_| LabError::spec(format!("sweep `{s}`: cannot parse `{t}`")))?;
            finite(x, "sweep bound")
        };
        let (start, stop, step) = (num(parts[1])?, num(parts[2])?, num(parts[3])?);
        if step <= 0.0 {
            return Err(LabError::spec(format!("sweep `{s}`: step must be positive")));
        }
        if stop < start {
            return Err(LabError::spec(format!("sweep `{s}`: empty range")));
        }
        Ok(Self { var, start, stop, step })
    }
}

impl fmt::Display for Sweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}:{}", self.var, self.start, self.stop, self.step)
    }
}

/// Experiment kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Protocol {
    /// Single-ancilla CF interferometer.
    Suppress,
    /// Bare bosonic channel.
    Unsuppressed,
    /// Two-party transmission with a preshared Bell pair.
    Communicate,
    /// Qubit teleportation through a damped Bell pair.
    Teleport,
    /// Optimized gate sequences compared with CF.
    Optimize,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Suppress => "suppress",
            Self::Unsuppressed => "unsuppressed",
            Self::Communicate => "communicate",
            Self::Teleport => "teleport",
            Self::Optimize => "optimize",
        })
    }
}

/// Raw option set shared by the command line and the config file. Every
/// field is optional so that flags can override file values.
#[derive(Clone, Debug, Default, PartialEq, clap::Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// Code specifier, e.g. `bin:n=2,kappa=4`.
    #[arg(long)]
    pub code: Option<String>,
    /// Bosonic noise specifier, e.g. `thermal:eta=0.05,nbar=0.5`.
    #[arg(long)]
    pub noise: Option<String>,
    /// Qubit noise: damping, depolarizing, `damp:p=<r>` or `depol:eta=<r>`.
    #[arg(long)]
    pub dv: Option<String>,
    /// Qubit noise strength when `p` is not swept.
    #[arg(long)]
    pub p: Option<f64>,
    /// Sweep `var:start:stop:step` with var in p, eta, alpha.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Fock cutoff (default 60, raised automatically for large codes).
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// CSV output path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Manifest path (defaults to `<out>.manifest.json`).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Interferometer layout: two-cf or local-rotation.
    #[arg(long)]
    pub variant: Option<String>,
    /// Add 1% loss and 1% composite damping after each conditional gate.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub gate_noise: Option<bool>,
    /// Accepted Bell-pair outcomes: 00 or both.
    #[arg(long)]
    pub herald: Option<String>,
    /// Optimizer layer count.
    #[arg(long)]
    pub layers: Option<usize>,
    /// Optimizer starts.
    #[arg(long)]
    pub starts: Option<usize>,
    /// Objective evaluations per start.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Optimizer seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Options {
    /// Reads a TOML config file with the same keys as the flags.
    pub fn from_file(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path).map_err(|source| LabError::Config {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| LabError::ConfigFormat {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// `self` with gaps filled from `fallback`.
    pub fn or(self, fallback: Self) -> Self {
        Self {
            code: self.code.or(fallback.code),
            noise: self.noise.or(fallback.noise),
            dv: self.dv.or(fallback.dv),
            p: self.p.or(fallback.p),
            sweep: self.sweep.or(fallback.sweep),
            cutoff: self.cutoff.or(fallback.cutoff),
            out: self.out.or(fallback.out),
            manifest: self.manifest.or(fallback.manifest),
            variant: self.variant.or(fallback.variant),
            gate_noise: self.gate_noise.or(fallback.gate_noise),
            herald: self.herald.or(fallback.herald),
            layers: self.layers.or(fallback.layers),
            starts: self.starts.or(fallback.starts),
            budget: self.budget.or(fallback.budget),
            seed: self.seed.or(fallback.seed),
        }
    }
}

/// Validated sweep settings.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    /// Experiment.
    pub protocol: Protocol,
    /// Code (absent for teleportation).
    pub code: Option<CodeLabel>,
    /// Bosonic noise (absent for teleportation).
    pub noise: Option<BosonicNoise>,
    /// Kind of qubit noise.
    pub dv: DvKind,
    /// Qubit noise strength when not swept.
    pub p: f64,
    /// Grid.
    pub sweep: Sweep,
    /// Explicit cutoff.
    pub cutoff: Option<usize>,
    /// Interferometer layout.
    pub variant: Variant,
    /// Per-gate noise switch.
    pub gate_noise: bool,
    /// Bell-pair herald.
    pub herald: Herald,
    /// Optimizer layers.
    pub layers: usize,
    /// Optimizer starts.
    pub starts: usize,
    /// Optimizer evaluations per start.
    pub budget: usize,
    /// Optimizer seed.
    pub seed: u64,
}

impl SweepSpec {
    /// Validates an option set for a protocol.
    pub fn new(protocol: Protocol, o: &Options) -> Result<Self, LabError> {
        let sweep: Sweep = o
            .sweep
            .as_deref()
            .ok_or_else(|| LabError::spec("missing --sweep"))?
            .parse()?;
        let needs_mode = protocol != Protocol::Teleport;
        let code = match (&o.code, needs_mode) {
            (Some(c), true) => Some(parse_code(c)?),
            (None, true) => return Err(LabError::spec(format!("{protocol} needs --code"))),
            (_, false) => None,
        };
        let noise = match (&o.noise, needs_mode) {
            (Some(n), true) => Some(parse_noise(n)?),
            (None, true) => return Err(LabError::spec(format!("{protocol} needs --noise"))),
            (_, false) => None,
        };
        match sweep.var {
            SweepVar::Alpha if !matches!(code, Some(CodeLabel::Cat { .. })) => {
                return Err(LabError::spec("an alpha sweep needs a cat code"));
            }
            SweepVar::Eta if noise.is_none() => return Err(LabError::spec("an eta sweep needs --noise")),
            SweepVar::P if sweep.stop > 1.0 || sweep.start < 0.0 => {
                return Err(LabError::spec("p must stay within [0, 1]"));
            }
            _ => {}
        }
        let (dv, dv_strength) = match o.dv.as_deref() {
            Some(d) => parse_dv(d)?,
            None => (DvKind::default(), None),
        };
        if let (Some(a), Some(b)) = (o.p, dv_strength) {
            if a != b {
                return Err(LabError::spec(format!("--p {a} conflicts with --dv strength {b}")));
            }
        }
        let p = o.p.or(dv_strength).unwrap_or(0.0);
        if !(0.0..=1.0).contains(&p) {
            return Err(LabError::spec(format!("p={p} outside [0, 1]")));
        }
        let variant = match o.variant.as_deref() {
            None | Some("two-cf") => Variant::TwoCf,
            Some("local-rotation") => Variant::LocalRotationPlusOneCf,
            Some(v) => return Err(LabError::spec(format!("unknown variant `{v}`"))),
        };
        let herald = match o.herald.as_deref() {
            None | Some("both") => Herald::Both,
            Some("00") => Herald::Only00,
            Some(h) => return Err(LabError::spec(format!("unknown herald `{h}`"))),
        };
        if o.cutoff.is_some_and(|n| n < 2) {
            return Err(LabError::spec("cutoff must be at least 2"));
        }
        let layers = o.layers.unwrap_or(2);
        if layers == 0 {
            return Err(LabError::spec("layers must be positive"));
        }
        Ok(Self {
            protocol,
            code,
            noise,
            dv,
            p,
            sweep,
            cutoff: o.cutoff,
            variant,
            gate_noise: o.gate_noise.unwrap_or(false),
            herald,
            layers,
            starts: o.starts.unwrap_or(DEFAULT_STARTS).max(1),
            budget: o.budget.unwrap_or(DEFAULT_BUDGET).max(1),
            seed: o.seed.unwrap_or(0),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn code_specifiers() {
        assert_eq!(
            parse_code("cat:n=6,alpha=1.916").unwrap(),
            CodeLabel::Cat {
                n: 6,
                alpha: Complex64::new(1.916, 0.0)
            }
        );
        assert_eq!(
            parse_code("bin:n=2,kappa=4").unwrap(),
            CodeLabel::Binomial { gap: 2, kappa: 4 }
        );
        assert_eq!(parse_code("gkp:delta=0.3").unwrap(), CodeLabel::Gkp { delta: 0.3 });
        for bad in [
            "cat:n=3,alpha=1",
            "bin:n=2",
            "gkp:delta=2",
            "foo:x=1",
            "bin:n=2,kappa=4,kappa=4",
            "cat:n=2,alpha=x",
        ] {
            assert!(parse_code(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn noise_specifiers() {
        assert_eq!(
            parse_noise("thermal:eta=0.05,nbar=0.5").unwrap(),
            BosonicNoise::Thermal { eta: 0.05, nbar: 0.5 }
        );
        assert_eq!(parse_noise("loss:eta=0.1").unwrap(), BosonicNoise::Loss { eta: 0.1 });
        assert!(parse_noise("loss:eta=1.5").is_err());
        assert!(parse_noise("thermal:eta=0.1").is_err());
        assert_eq!(noise_text(parse_noise("gdn:eta=0.2").unwrap()), "gdn:eta=0.2");
    }

    #[test]
    fn dv_specifiers() {
        assert_eq!(parse_dv("damping").unwrap(), (DvKind::Damping, None));
        assert_eq!(parse_dv("damp:p=0.1").unwrap(), (DvKind::Damping, Some(0.1)));
        assert_eq!(parse_dv("depol:eta=0.1").unwrap(), (DvKind::Depolarizing, Some(0.1)));
        assert!(parse_dv("depol:p=0.1").is_err());
        assert!(parse_dv("damp:p=2").is_err());
        assert!(parse_dv("amplitude").is_err());
    }

    #[test]
    fn sweep_grid() {
        let s: Sweep = "p:0:0.3:0.05".parse().unwrap();
        assert_eq!(s.values(), vec![0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3]);
        let t: Sweep = "p:0:1:0.1".parse().unwrap();
        assert_eq!(t.values().len(), 11);
        assert!("p:0.3:0:0.05".parse::<Sweep>().is_err());
        assert!("p:0:1:0".parse::<Sweep>().is_err());
        assert!("q:0:1:0.1".parse::<Sweep>().is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = Options {
            code: Some("bin:n=2,kappa=4".into()),
            seed: Some(4),
            ..Options::default()
        };
        let cli = Options {
            seed: Some(9),
            ..Options::default()
        };
        let merged = cli.or(file);
        assert_eq!(merged.seed, Some(9));
        assert_eq!(merged.code.as_deref(), Some("bin:n=2,kappa=4"));
    }

    #[test]
    fn protocol_requirements() {
        let o = Options {
            sweep: Some("p:0:1:0.5".into()),
            ..Options::default()
        };
        assert!(SweepSpec::new(Protocol::Teleport, &o).is_ok());
        assert!(SweepSpec::new(Protocol::Suppress, &o).is_err());
        let alpha = Options {
            code: Some("bin:n=2,kappa=4".into()),
            noise: Some("loss:eta=0.05".into()),
            sweep: Some("alpha:1:2:0.5".into()),
            ..Options::default()
        };
        assert!(SweepSpec::new(Protocol::Suppress, &alpha).is_err());
    }
}
