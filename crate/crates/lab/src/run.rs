//! Grid evaluation.

use std::time::Instant;

use cfsupp::channels::BosonicNoise;
use cfsupp::codes::{self, BosonicCode, CodeLabel};
use cfsupp::communication::{
    closed_form_comm_success, closed_form_outcome_success, teleportation_design_fidelities, teleportation_fidelity,
    CommConfig, CommProtocol, Herald, Outcome,
};
use cfsupp::fidelity::{HeraldedMap, LogicalProcess};
use cfsupp::optimize::{best_result, optimize_start, GateSequence, OptimizeProblem, OptimizeResult, OptimizeSettings};
use cfsupp::suppression::{
    closed_form_fidelity, closed_form_success, closed_form_unsuppressed, GateNoise, SuppressionConfig,
    SuppressionProtocol, Unsuppressed,
};
use cfsupp::{CMat, Complex64, FockSpace};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::LabError;
use crate::spec::{Protocol, SweepSpec, SweepVar, DEFAULT_CUTOFF};

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "CFSUPP_WORKERS";

/// One long-format CSV row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRecord {
    /// Protocol name.
    pub protocol: String,
    /// Code family, `none` for teleportation.
    pub code: String,
    /// Code parameters in specifier syntax.
    pub code_params: String,
    /// Bosonic noise rate.
    pub eta: f64,
    /// Mean thermal excitation.
    pub nbar: f64,
    /// Qubit noise strength.
    pub p_dv: f64,
    /// Swept variable.
    pub sweep_var: String,
    /// Value of the swept variable.
    pub sweep_value: f64,
    /// Metric name, or `error:<kind>` for a failed grid point.
    pub metric: String,
    /// Metric value.
    pub value: f64,
    /// Numerical error estimate.
    pub err_est: f64,
}

/// Parameters of a single grid point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    /// Position in the grid.
    pub index: usize,
    /// Value of the swept variable.
    pub sweep_value: f64,
    /// Code at this point.
    pub code: Option<CodeLabel>,
    /// Bosonic noise at this point.
    pub noise: Option<BosonicNoise>,
    /// Qubit noise strength.
    pub p: f64,
}

/// Numerical diagnostics of a grid point, recorded in the manifest.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PointDiagnostics {
    /// Position in the grid.
    pub index: usize,
    /// Value of the swept variable.
    pub sweep_value: f64,
    /// Fock cutoff used.
    pub cutoff: Option<usize>,
    /// CPTP defect of the mode channel.
    pub truncation_defect: Option<f64>,
    /// Accepted quadrature order of the fidelity average.
    pub quadrature_order: Option<usize>,
    /// Change between the last two quadrature orders.
    pub quadrature_change: Option<f64>,
    /// Error message when the point failed.
    pub error: Option<String>,
}

/// Optimized sequence and where it was used.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizationRecord {
    /// Grid points evaluated with this sequence.
    pub points: Vec<usize>,
    /// Sequence in structured text.
    pub sequence: String,
    /// Calibrated fidelity of the sequence.
    pub value: f64,
    /// Calibrated fidelity of the CF sequence.
    pub cf_value: f64,
    /// Start that produced the best value.
    pub start: usize,
    /// Objective evaluations used by that start.
    pub evaluations: usize,
    /// Whether that start converged before the budget ran out.
    pub converged: bool,
}

/// Everything a sweep produced.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutput {
    /// Rows in grid order.
    pub records: Vec<SweepRecord>,
    /// One entry per grid point.
    pub diagnostics: Vec<PointDiagnostics>,
    /// Optimizer results (optimize protocol only).
    pub optimizations: Vec<OptimizationRecord>,
    /// Number of failed grid points.
    pub failures: usize,
    /// Worker threads used.
    pub workers: usize,
    /// Wall time in seconds.
    pub wall_time_s: f64,
}

/// Grid points of a spec.
pub fn grid(spec: &SweepSpec) -> Vec<GridPoint> {
    spec.sweep
        .values()
        .into_iter()
        .enumerate()
        .map(|(index, v)| {
            let mut pt = GridPoint {
                index,
                sweep_value: v,
                code: spec.code,
                noise: spec.noise,
                p: spec.p,
            };
            match spec.sweep.var {
                SweepVar::P => pt.p = v,
                SweepVar::Eta => pt.noise = spec.noise.map(|n| n.with_eta(v)),
                SweepVar::Alpha => {
                    if let Some(CodeLabel::Cat { n, .. }) = spec.code {
                        pt.code = Some(CodeLabel::Cat {
                            n,
                            alpha: Complex64::new(v, 0.0),
                        });
                    }
                }
            }
            pt
        })
        .collect()
}

/// Worker count from [`WORKERS_ENV`], or `None` for the rayon default.
pub fn workers_from_env() -> Result<Option<usize>, LabError> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(LabError::spec(format!("{WORKERS_ENV}=`{v}` is not a positive integer"))),
        },
        Err(_) => Ok(None),
    }
}

struct Metric {
    name: String,
    value: f64,
    err: f64,
}

fn metric(name: &str, value: f64, err: f64) -> Metric {
    Metric {
        name: name.to_string(),
        value,
        err,
    }
}

struct PointResult {
    metrics: Vec<Metric>,
    diag: PointDiagnostics,
}

struct Context<'a> {
    spec: &'a SweepSpec,
    optimized: Option<&'a [(Vec<usize>, GateSequence)]>,
}

fn cutoff_for(spec: &SweepSpec, code: CodeLabel) -> cfsupp::Result<usize> {
    match spec.cutoff {
        Some(n) => Ok(n),
        None => Ok(DEFAULT_CUTOFF.max(codes::required_cutoff(code)?)),
    }
}

fn setup(spec: &SweepSpec, pt: &GridPoint) -> cfsupp::Result<(BosonicCode, BosonicNoise, FockSpace)> {
    let label = pt.code.expect("validated: mode protocols carry a code");
    let noise = pt.noise.expect("validated: mode protocols carry noise");
    let space = FockSpace::new(cutoff_for(spec, label)?)?;
    Ok((codes::build(label, space)?, noise, space))
}

fn fidelity_metrics(process: &LogicalProcess, defect: f64, diag: &mut PointDiagnostics) -> cfsupp::Result<Vec<Metric>> {
    let avg = process.average_fidelity()?;
    diag.quadrature_order = Some(avg.order);
    diag.quadrature_change = Some(avg.change);
    Ok(vec![
        metric("avg_fidelity", avg.value, avg.change + defect),
        metric("avg_success", process.average_success(), defect),
    ])
}

fn closed_fidelity(code: &BosonicCode, noise: BosonicNoise, unsuppressed: bool) -> Option<Metric> {
    let th = noise.thermal()?;
    let eta = th.eta();
    Some(if unsuppressed {
        metric("closed_form_fidelity", closed_form_unsuppressed(code, th), eta * eta)
    } else {
        metric("closed_form_fidelity", closed_form_fidelity(code, th), eta.powi(3))
    })
}

fn sum_images(a: &[[CMat; 2]; 2], b: &[[CMat; 2]; 2]) -> [[CMat; 2]; 2] {
    [
        [&a[0][0] + &b[0][0], &a[0][1] + &b[0][1]],
        [&a[1][0] + &b[1][0], &a[1][1] + &b[1][1]],
    ]
}

fn outcome_images(proto: &CommProtocol, code: &BosonicCode, outcome: Outcome) -> cfsupp::Result<[[CMat; 2]; 2]> {
    let k = [code.ket0(), code.ket1()];
    let y00 = proto.outcome(&(k[0] * k[0].adjoint()), outcome)?;
    let y11 = proto.outcome(&(k[1] * k[1].adjoint()), outcome)?;
    let y01 = proto.outcome(&(k[0] * k[1].adjoint()), outcome)?;
    let y10 = y01.adjoint();
    Ok([[y00, y01], [y10, y11]])
}

fn evaluate(ctx: &Context<'_>, pt: &GridPoint, diag: &mut PointDiagnostics) -> cfsupp::Result<Vec<Metric>> {
    let spec = ctx.spec;
    if spec.protocol == Protocol::Teleport {
        let design = teleportation_design_fidelities(pt.p)?;
        let avg = design.iter().sum::<f64>() / design.len() as f64;
        return Ok(vec![
            metric("avg_fidelity", avg, 0.0),
            metric("avg_success", 1.0, 0.0),
            metric("closed_form_fidelity", teleportation_fidelity(pt.p), 0.0),
            metric("closed_form_success", 1.0, 0.0),
        ]);
    }
    let (code, noise, space) = setup(spec, pt)?;
    diag.cutoff = Some(space.cutoff());
    let channel = noise.channel(space)?;
    let defect = channel.cptp_defect();
    diag.truncation_defect = Some(defect);
    let gl = noise.gain_loss()?;
    let mut out = Vec::new();
    match spec.protocol {
        Protocol::Suppress => {
            let config = SuppressionConfig::for_code(&code)
                .with_variant(spec.variant)
                .with_dv_noise(spec.dv.at(pt.p))
                .with_gate_noise(spec.gate_noise.then_some(GateNoise::ONE_PERCENT));
            let proto = SuppressionProtocol::new(space, channel, config)?;
            let process = LogicalProcess::new(&code, &proto)?;
            out.extend(fidelity_metrics(&process, proto.truncation_defect(), diag)?);
            out.extend(closed_fidelity(&code, noise, false));
            out.push(metric("closed_form_success", closed_form_success(&code, gl), 0.0));
        }
        Protocol::Unsuppressed => {
            let map = Unsuppressed::new(space, channel)?;
            let process = LogicalProcess::new(&code, &map)?;
            out.extend(fidelity_metrics(&process, defect, diag)?);
            out.extend(closed_fidelity(&code, noise, true));
            out.push(metric("closed_form_success", 1.0, 0.0));
        }
        Protocol::Communicate => {
            let proto = CommProtocol::new(space, channel, CommConfig::new(pt.p, spec.herald)?)?;
            let zeros = outcome_images(&proto, &code, Outcome::Zeros)?;
            let ones = outcome_images(&proto, &code, Outcome::Ones)?;
            let p00 = LogicalProcess::from_images(&code, zeros.clone())?;
            let p11 = LogicalProcess::from_images(&code, ones.clone())?;
            let accepted = match spec.herald {
                Herald::Only00 => p00.clone(),
                Herald::Both => LogicalProcess::from_images(&code, sum_images(&zeros, &ones))?,
            };
            out.extend(fidelity_metrics(&accepted, defect, diag)?);
            out.push(metric(
                "closed_form_success",
                closed_form_comm_success(&code, gl, pt.p, spec.herald),
                0.0,
            ));
            out.push(metric("avg_success_00", p00.average_success(), defect));
            out.push(metric("avg_success_11", p11.average_success(), defect));
            out.push(metric(
                "closed_form_success_00",
                closed_form_outcome_success(&code, gl, pt.p, Outcome::Zeros),
                0.0,
            ));
            out.push(metric(
                "closed_form_success_11",
                closed_form_outcome_success(&code, gl, pt.p, Outcome::Ones),
                0.0,
            ));
            out.push(metric("tele_fidelity", teleportation_fidelity(pt.p), 0.0));
        }
        Protocol::Optimize => {
            let seq = ctx
                .optimized
                .and_then(|all| all.iter().find(|(pts, _)| pts.contains(&pt.index)))
                .map(|(_, s)| s)
                .expect("optimization precedes evaluation");
            let problem = OptimizeProblem::new(&code, &channel, spec.dv.at(pt.p), spec.layers)?;
            let process = problem.process(seq)?;
            out.extend(fidelity_metrics(&process, defect, diag)?);
            let cf = problem.process(&GateSequence::cf(spec.layers))?;
            let cf_avg = cf.average_fidelity()?;
            out.push(metric("cf_avg_fidelity", cf_avg.value, cf_avg.change + defect));
            out.push(metric("cf_avg_success", cf.average_success(), defect));
            out.extend(closed_fidelity(&code, noise, false));
            out.push(metric("closed_form_success", closed_form_success(&code, gl), 0.0));
        }
        Protocol::Teleport => unreachable!("handled above"),
    }
    Ok(out)
}

fn run_point(ctx: &Context<'_>, pt: &GridPoint) -> PointResult {
    let mut diag = PointDiagnostics {
        index: pt.index,
        sweep_value: pt.sweep_value,
        ..PointDiagnostics::default()
    };
    let metrics = match evaluate(ctx, pt, &mut diag) {
        Ok(m) => m,
        Err(e) => {
            log::error!(
                "grid point {} ({}={}): {e}",
                pt.index,
                ctx.spec.sweep.var,
                pt.sweep_value
            );
            diag.error = Some(e.to_string());
            vec![metric(&format!("error:{}", e.kind()), f64::NAN, f64::NAN)]
        }
    };
    if ctx.spec.protocol != Protocol::Teleport {
        if let Some(n) = pt.noise {
            if n.thermal().is_none() && diag.error.is_none() {
                log::warn!("grid point {}: no closed-form fidelity for {n:?}", pt.index);
            }
        }
    }
    PointResult { metrics, diag }
}

/// Calibrated (p = 0) optimization for one grid point's code and noise.
fn optimize_point(spec: &SweepSpec, pt: &GridPoint) -> cfsupp::Result<(OptimizeResult, f64)> {
    let (code, noise, space) = setup(spec, pt)?;
    let channel = noise.channel(space)?;
    let problem = OptimizeProblem::new(&code, &channel, None, spec.layers)?;
    let settings = OptimizeSettings {
        starts: spec.starts,
        budget: spec.budget,
        seed: spec.seed,
    };
    let results: Vec<OptimizeResult> = (0..settings.starts)
        .into_par_iter()
        .map(|s| optimize_start(&problem, settings, s))
        .collect();
    let best = best_result(results).expect("at least one start");
    let cf = problem.objective(&GateSequence::cf(spec.layers));
    log::info!("optimized: {}", cfsupp::optimize::describe(&best));
    Ok((best, cf))
}

fn optimizations(spec: &SweepSpec, points: &[GridPoint]) -> (Vec<(Vec<usize>, GateSequence)>, Vec<OptimizationRecord>) {
    // Sequences are calibrated at p = 0, so a p sweep shares one optimization.
    let groups: Vec<Vec<usize>> = if spec.sweep.var == SweepVar::P {
        vec![points.iter().map(|p| p.index).collect()]
    } else {
        points.iter().map(|p| vec![p.index]).collect()
    };
    let mut seqs = Vec::new();
    let mut records = Vec::new();
    for group in groups {
        let pt = points[group[0]];
        match optimize_point(spec, &pt) {
            Ok((best, cf_value)) => {
                records.push(OptimizationRecord {
                    points: group.clone(),
                    sequence: best.sequence.to_string(),
                    value: best.value,
                    cf_value,
                    start: best.start,
                    evaluations: best.evaluations,
                    converged: best.converged,
                });
                seqs.push((group, best.sequence));
            }
            // Points without a sequence fail again with the same error during evaluation.
            Err(e) => log::error!("optimization for grid point {}: {e}", pt.index),
        }
    }
    (seqs, records)
}

fn rows<'a>(spec: &'a SweepSpec, pt: &GridPoint, metrics: Vec<Metric>) -> impl Iterator<Item = SweepRecord> + 'a {
    let (code, code_params) = match pt.code {
        Some(c) => (c.family().to_string(), c.params()),
        None => ("none".to_string(), String::new()),
    };
    let (eta, nbar) = pt.noise.map_or((0.0, 0.0), |n| (n.eta(), n.nbar()));
    let p = pt.p;
    let sweep_value = pt.sweep_value;
    metrics.into_iter().map(move |m| SweepRecord {
        protocol: spec.protocol.to_string(),
        code: code.clone(),
        code_params: code_params.clone(),
        eta,
        nbar,
        p_dv: p,
        sweep_var: spec.sweep.var.to_string(),
        sweep_value,
        metric: m.name,
        value: m.value,
        err_est: m.err,
    })
}

fn sweep_in_pool(spec: &SweepSpec) -> (Vec<SweepRecord>, Vec<PointDiagnostics>, Vec<OptimizationRecord>, usize) {
    let points = grid(spec);
    let (seqs, opt_records) = if spec.protocol == Protocol::Optimize {
        optimizations(spec, &points)
    } else {
        (Vec::new(), Vec::new())
    };
    let ctx = Context {
        spec,
        optimized: Some(&seqs),
    };
    let results: Vec<PointResult> = points.par_iter().map(|pt| run_point(&ctx, pt)).collect();
    let mut records = Vec::new();
    let mut diags = Vec::new();
    let mut failures = 0;
    for (pt, r) in points.iter().zip(results) {
        if r.diag.error.is_some() {
            failures += 1;
        }
        records.extend(rows(spec, pt, r.metrics));
        diags.push(r.diag);
    }
    (records, diags, opt_records, failures)
}

/// Runs every grid point on a pool of `workers` threads (rayon default when
/// `None`). Failed points produce a single `error:<kind>` row and the
/// remaining points still run.
pub fn run_sweep(spec: &SweepSpec, workers: Option<usize>) -> Result<SweepOutput, LabError> {
    let start = Instant::now();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| LabError::Pool(e.to_string()))?;
    let workers = pool.current_num_threads();
    let (records, diagnostics, optimizations, failures) = pool.install(|| sweep_in_pool(spec));
    Ok(SweepOutput {
        records,
        diagnostics,
        optimizations,
        failures,
        workers,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}
