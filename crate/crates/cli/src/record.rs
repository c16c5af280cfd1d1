//! Run records and artifact persistence.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::run::{Check, Outcome, Table};

pub const RECORD_FILE: &str = "record.json";
pub const RECORD_FORMAT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsInfo {
    pub version: Option<u32>,
    /// `bundled` or the override path.
    pub source: String,
}

impl ConstantsInfo {
    pub fn current() -> Self {
        let source = std::env::var(nodal_lab_core::constants::ENV_OVERRIDE).unwrap_or_else(|_| "bundled".into());
        let version = nodal_lab_core::constants::global().ok().map(|c| c.version);
        Self { version, source }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub format: u32,
    pub config_hash: String,
    /// The only nondeterministic field.
    pub timestamp: String,
    pub command: String,
    pub config: ExperimentConfig,
    pub constants: ConstantsInfo,
    pub checks: Vec<Check>,
    pub artifacts: Vec<String>,
    pub pass: bool,
    pub error: Option<String>,
}

impl RunRecord {
    pub fn new(cfg: &ExperimentConfig, checks: Vec<Check>, artifacts: Vec<String>, error: Option<String>) -> Self {
        let pass = error.is_none() && !checks.is_empty() && checks.iter().all(|c| c.pass);
        Self {
            format: RECORD_FORMAT,
            config_hash: cfg.hash(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            command: cfg.command.name().into(),
            config: cfg.clone(),
            constants: ConstantsInfo::current(),
            checks,
            artifacts,
            pass,
            error,
        }
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
        serde_json::from_str(&text).map_err(|e| e.to_string())
    }
}

/// Writes via a temporary file and a rename, so readers never see a torn file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

pub fn table_bytes(t: &Table) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&t.header)?;
    for row in &t.rows {
        w.write_record(row)?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

/// Default run directory: `runs/<command>-<first 12 hash digits>`.
pub fn default_dir(cfg: &ExperimentConfig) -> PathBuf {
    PathBuf::from("runs").join(format!("{}-{}", cfg.command.name(), &cfg.hash()[..12]))
}

/// Refuses a directory holding a record of a different configuration.
pub fn claim_dir(dir: &Path, cfg: &ExperimentConfig) -> Result<(), String> {
    let existing = dir.join(RECORD_FILE);
    if existing.exists() {
        let hash = cfg.hash();
        match RunRecord::load(&existing) {
            Ok(r) if r.config_hash == hash => {}
            Ok(r) => {
                return Err(format!(
                    "{} holds a run of another configuration ({}); choose another --out",
                    dir.display(),
                    &r.config_hash[..12.min(r.config_hash.len())]
                ))
            }
            Err(e) => return Err(format!("{}: unreadable record: {e}", existing.display())),
        }
    }
    fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))
}

/// Persists artifacts, then the record. A failed run keeps no artifacts.
pub fn persist(dir: &Path, cfg: &ExperimentConfig, result: Result<Outcome, String>) -> io::Result<RunRecord> {
    let (checks, artifacts, error) = match result {
        Ok(out) => match write_artifacts(dir, &out) {
            Ok(files) => (out.checks, files, None),
            Err(e) => (out.checks, Vec::new(), Some(format!("writing artifacts: {e}"))),
        },
        Err(e) => (Vec::new(), Vec::new(), Some(e)),
    };
    let record = RunRecord::new(cfg, checks, artifacts, error);
    let json = serde_json::to_vec_pretty(&record).map_err(io::Error::other)?;
    write_atomic(&dir.join(RECORD_FILE), &json)?;
    Ok(record)
}

fn write_artifacts(dir: &Path, out: &Outcome) -> io::Result<Vec<String>> {
    let mut files = Vec::new();
    for t in &out.tables {
        write_atomic(&dir.join(&t.file), &table_bytes(t).map_err(io::Error::other)?)?;
        files.push(t.file.clone());
    }
    for p in &out.plots {
        write_atomic(&dir.join(&p.file), p.render().as_bytes())?;
        files.push(p.file.clone());
    }
    for (name, body) in &out.documents {
        write_atomic(&dir.join(name), body.as_bytes())?;
        files.push(name.clone());
    }
    Ok(files)
}
