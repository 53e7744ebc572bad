//! CSV and manifest writers.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::LabError;
use crate::run::{OptimizationRecord, PointDiagnostics, SweepOutput, SweepRecord};
use crate::spec::{noise_text, SweepSpec};

/// Column order of the CSV output.
pub const CSV_HEADER: [&str; 11] = [
    "protocol",
    "code",
    "code_params",
    "eta",
    "nbar",
    "p_dv",
    "sweep_var",
    "sweep_value",
    "metric",
    "value",
    "err_est",
];

/// Writes records with a header row.
pub fn write_csv<W: Write>(records: &[SweepRecord], out: W) -> Result<(), LabError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Writes records to a file.
pub fn write_csv_file(records: &[SweepRecord], path: &Path) -> Result<(), LabError> {
    let file = std::fs::File::create(path).map_err(|source| LabError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(records, std::io::BufWriter::new(file))
}

/// Default manifest path beside a CSV file.
pub fn manifest_path(csv: &Path) -> PathBuf {
    let mut name = csv.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    csv.with_file_name(name)
}

#[derive(Serialize)]
struct SpecSummary {
    protocol: String,
    code: Option<String>,
    noise: Option<String>,
    dv: String,
    p: f64,
    sweep: String,
    cutoff: Option<usize>,
    variant: String,
    gate_noise: bool,
    herald: String,
    layers: usize,
    starts: usize,
    budget: usize,
    seed: u64,
}

/// Run manifest.
#[derive(Serialize)]
pub struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    spec: SpecSummary,
    rows: usize,
    failures: usize,
    workers: usize,
    wall_time_s: f64,
    points: &'a [PointDiagnostics],
    optimizations: &'a [OptimizationRecord],
}

impl<'a> Manifest<'a> {
    /// Collects the manifest of a finished sweep.
    pub fn new(spec: &SweepSpec, out: &'a SweepOutput) -> Self {
        Self {
            tool: "cfsupp",
            version: env!("CARGO_PKG_VERSION"),
            spec: SpecSummary {
                protocol: spec.protocol.to_string(),
                code: spec.code.map(|c| c.to_string()),
                noise: spec.noise.map(noise_text),
                dv: format!("{:?}", spec.dv).to_lowercase(),
                p: spec.p,
                sweep: spec.sweep.to_string(),
                cutoff: spec.cutoff,
                variant: format!("{:?}", spec.variant),
                gate_noise: spec.gate_noise,
                herald: format!("{:?}", spec.herald),
                layers: spec.layers,
                starts: spec.starts,
                budget: spec.budget,
                seed: spec.seed,
            },
            rows: out.records.len(),
            failures: out.failures,
            workers: out.workers,
            wall_time_s: out.wall_time_s,
            points: &out.diagnostics,
            optimizations: &out.optimizations,
        }
    }

    /// Writes pretty JSON to `path`.
    pub fn write(&self, path: &Path) -> Result<(), LabError> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|source| LabError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_beside_csv() {
        assert_eq!(
            manifest_path(Path::new("out/a.csv")),
            PathBuf::from("out/a.csv.manifest.json")
        );
    }

    #[test]
    fn header_and_nan_rows() {
        let r = SweepRecord {
            protocol: "suppress".into(),
            code: "bin".into(),
            code_params: "n=2,kappa=4".into(),
            eta: 0.05,
            nbar: 0.5,
            p_dv: 0.0,
            sweep_var: "p".into(),
            sweep_value: 0.0,
            metric: "error:not_physical".into(),
            value: f64::NAN,
            err_est: f64::NAN,
        };
        let mut buf = Vec::new();
        write_csv(&[r], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "protocol,code,code_params,eta,nbar,p_dv,sweep_var,sweep_value,metric,value,err_est\n\
             suppress,bin,\"n=2,kappa=4\",0.05,0.5,0.0,p,0.0,error:not_physical,NaN,NaN\n"
        );
    }
}
