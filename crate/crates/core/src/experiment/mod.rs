//! Declarative experiments: presets, orchestration and CSV reports.

mod config;
mod empirical;
mod sweep;
mod validate;

pub use config::{
    EmpiricalSettings, ExperimentConfig, ExperimentKind, ModelSettings, NetworkSettings, PanelFormat, Scale, SimulationSettings,
    SweepSettings, SyntheticSuite, SCHEMA_VERSION,
};
pub use empirical::{cmd_empirical, load_panels, read_observations, EmpiricalOutcome, SyntheticOrigin, TopicRow};
pub use sweep::{cmd_sweep, CellSummary, GraphResult, SweepCell, SweepOutcome};
pub use validate::{cmd_validate_spectral, ValidateOutcome, ValidateRow, ValidateSummary};

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// A CSV table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem.
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for r in &self.rows {
            out.write_record(r)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        buf
    }

    /// Parses CSV text with a header row.
    pub fn from_csv(name: &str, bytes: &[u8]) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(bytes);
        let header = rdr.headers()?.iter().map(str::to_string).collect();
        let rows = rdr.records().map(|r| r.map(|r| r.iter().map(str::to_string).collect())).collect::<csv::Result<_>>()?;
        Ok(Table { name: name.into(), header, rows })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

pub(crate) fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

#[derive(Debug, Clone)]
pub enum ExperimentReport {
    Validate(ValidateOutcome),
    Sweep(SweepOutcome),
    Empirical(EmpiricalOutcome),
}

impl ExperimentReport {
    pub fn tables(&self) -> Vec<Table> {
        match self {
            ExperimentReport::Validate(o) => o.tables(),
            ExperimentReport::Sweep(o) => o.tables(),
            ExperimentReport::Empirical(o) => o.tables(),
        }
    }
}

/// Runs `cfg` on a pool of `cfg.jobs` workers.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cfg.jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| Error::param("jobs", e.to_string()))?;
    pool.install(|| match cfg.experiment {
        ExperimentKind::ValidateSpectral => cmd_validate_spectral(cfg).map(ExperimentReport::Validate),
        ExperimentKind::Empirical => cmd_empirical(cfg).map(ExperimentReport::Empirical),
        _ => cmd_sweep(cfg).map(ExperimentReport::Sweep),
    })
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 of the configuration with the fields that cannot change results
/// (`jobs`, `out`) cleared.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    json_hash(&canonical(cfg))
}

fn canonical(cfg: &ExperimentConfig) -> ExperimentConfig {
    ExperimentConfig { jobs: None, out: None, ..cfg.clone() }
}

fn json_hash<C: Serialize>(config: &C) -> String {
    hex(&Sha256::digest(serde_json::to_vec(config).expect("config serialises")))
}

#[derive(Debug, Serialize)]
struct ManifestFile {
    name: String,
    rows: usize,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a, C: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    schema_version: u32,
    seed: Option<u64>,
    config_sha256: String,
    config: &'a C,
    files: Vec<ManifestFile>,
}

/// Writes every table as `<dir>/<name>.csv` plus a `manifest.json` recording
/// the command, seed, configuration hash and per-file checksums. Returns the
/// paths written, manifest last.
pub fn write_tables<C: Serialize>(tables: &[Table], command: &str, seed: Option<u64>, config: &C, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut files = Vec::new();
    for t in tables {
        let bytes = t.to_csv_bytes();
        let path = dir.join(format!("{}.csv", t.name));
        std::fs::write(&path, &bytes)?;
        files.push(ManifestFile { name: format!("{}.csv", t.name), rows: t.rows.len(), sha256: hex(&Sha256::digest(&bytes)) });
        written.push(path);
    }
    let manifest = Manifest {
        tool: "opdiv",
        version: env!("CARGO_PKG_VERSION"),
        command,
        schema_version: SCHEMA_VERSION,
        seed,
        config_sha256: json_hash(config),
        config,
        files,
    };
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    text.push('\n');
    std::fs::write(&path, text)?;
    written.push(path);
    Ok(written)
}

/// `write_tables` for an experiment report.
pub fn write_report(report: &ExperimentReport, cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    write_tables(&report.tables(), cfg.experiment.name(), Some(cfg.seed), &canonical(cfg), dir)
}
