//! Instance, config and report files.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::model::Instance;

use super::{ExperimentConfig, HarnessError, Summary, TrialResult};

pub const CSV_HEADER: [&str; 10] =
    ["instance_id", "n", "k", "algo", "seed", "duels", "success", "wall_ms", "delta", "regret"];

#[derive(Serialize)]
struct CsvRow<'a> {
    instance_id: &'a str,
    n: usize,
    k: usize,
    algo: &'static str,
    seed: u64,
    duels: u64,
    success: bool,
    wall_ms: u64,
    delta: Option<f64>,
    regret: Option<f64>,
}

pub fn load_instance(path: &Path) -> Result<Instance, HarnessError> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn save_instance(path: &Path, instance: &Instance) -> Result<(), HarnessError> {
    fs::write(path, serde_json::to_string_pretty(instance)? + "\n")?;
    Ok(())
}

pub fn read_config(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    let config: ExperimentConfig = serde_json::from_str(&fs::read_to_string(path)?)?;
    config.validate()?;
    Ok(config)
}

/// Writes the rows with the fixed column set of [`CSV_HEADER`].
pub fn write_csv<W: Write>(rows: &[TrialResult], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(CSV_HEADER)?;
    }
    for r in rows {
        w.serialize(CsvRow {
            instance_id: &r.instance_id,
            n: r.n,
            k: r.k,
            algo: r.algo.name(),
            seed: r.seed,
            duels: r.duels,
            success: r.success,
            wall_ms: r.wall_ms,
            delta: r.delta,
            regret: r.regret,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary<W: Write>(summary: &Summary, mut out: W) -> Result<(), HarnessError> {
    serde_json::to_writer_pretty(&mut out, summary)?;
    writeln!(out)?;
    Ok(())
}
