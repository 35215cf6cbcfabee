//! Declarative experiment runner: TOML config in, CSV tables, a JSON summary
//! and a run manifest out.

pub mod config;
pub mod cookbook;
pub mod runner;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

pub use config::ExperimentConfig;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error("unknown figure {0:?}")]
    UnknownFigure(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] ptchain_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::UnknownFigure(_) => 2,
            RunError::Numerical(_) => 3,
            RunError::Io(_) => 4,
        }
    }

    /// Stable name for manifests. Numerical failures carry the core variant.
    pub fn name(&self) -> &'static str {
        match self {
            RunError::Config(_) => "Config",
            RunError::UnknownFigure(_) => "UnknownFigure",
            RunError::Numerical(e) => e.name(),
            RunError::Io(_) => "Io",
        }
    }
}

/// Hash of the canonical (parsed, defaults filled in) config, so formatting
/// and comment changes in the TOML do not change it. The `[output]` table is
/// left out: moving a run elsewhere does not make it a different experiment.
pub fn config_hash(config: &ExperimentConfig) -> String {
    let mut canonical = serde_json::to_value(config).expect("config serializes");
    canonical.as_object_mut().expect("config is a table").remove("output");
    hex::encode(Sha256::digest(canonical.to_string()))
}

fn persist(dir: &Path, name: &str, fill: impl FnOnce(&mut NamedTempFile) -> std::io::Result<()>) -> Result<(), RunError> {
    let mut tmp = NamedTempFile::new_in(dir)?;
    fill(&mut tmp)?;
    tmp.as_file().sync_all()?;
    tmp.persist(dir.join(name)).map_err(|e| e.error)?;
    Ok(())
}

fn write_json(dir: &Path, name: &str, value: &Value) -> Result<(), RunError> {
    persist(dir, name, |f| {
        serde_json::to_writer_pretty(&mut *f, value)?;
        writeln!(f)
    })
}

fn write_table(dir: &Path, name: &str, table: &runner::Table) -> Result<(), RunError> {
    persist(dir, name, |f| {
        let mut w = csv::Writer::from_writer(&mut *f);
        w.write_record(&table.header)?;
        for row in &table.rows {
            w.write_record(row)?;
        }
        w.flush()
    })
}

/// Outcome of one run, as recorded in the manifest.
pub struct RunReport {
    pub manifest: Value,
    pub result: Result<(), RunError>,
}

/// Run a validated config, writing outputs under `config.output.dir`.
/// A manifest is written whether or not the computation succeeded.
pub fn run(config: &ExperimentConfig) -> RunReport {
    let dir = PathBuf::from(&config.output.dir);
    let stem = &config.output.stem;
    let start = Instant::now();
    let mut outputs = Vec::new();
    let result = (|| {
        let artifacts = runner::execute(config)?;
        std::fs::create_dir_all(&dir)?;
        for table in &artifacts.tables {
            let name = format!("{stem}.{}.csv", table.suffix);
            write_table(&dir, &name, table)?;
            outputs.push(name);
        }
        let name = format!("{stem}.summary.json");
        write_json(&dir, &name, &artifacts.summary)?;
        outputs.push(name);
        Ok(())
    })();
    let manifest_name = format!("{stem}.manifest.json");
    let error = result.as_ref().err().map(|e: &RunError| json!({ "name": e.name(), "message": e.to_string() }));
    if result.is_ok() {
        outputs.push(manifest_name.clone());
    }
    let manifest = json!({
        "artifact_version": env!("CARGO_PKG_VERSION"),
        "config_sha256": config_hash(config),
        "seed": config.seed,
        "task": config.task.name(),
        "status": if result.is_ok() { "ok" } else { "failed" },
        "error": error,
        "wall_time_s": start.elapsed().as_secs_f64(),
        "outputs": outputs,
        "config": config,
    });
    // An i/o failure may have left no directory; the manifest then goes to stdout only.
    let result = match result {
        Err(RunError::Io(e)) => Err(RunError::Io(e)),
        r => std::fs::create_dir_all(&dir)
            .map_err(RunError::from)
            .and_then(|_| write_json(&dir, &manifest_name, &manifest))
            .and(r),
    };
    RunReport { manifest, result }
}
