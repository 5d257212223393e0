//! CSV/JSON emission with `#`-prefixed metadata lines.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::Result;

/// Two-sided 99.9% normal quantile.
pub const Z_999: f64 = 3.290_526_731_491_926;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Metadata lines written ahead of every CSV.
pub fn metadata(cfg: &ExperimentConfig, command: &str) -> Vec<String> {
    vec![
        format!("# mdi-bench {}", env!("CARGO_PKG_VERSION")),
        format!("# command: {command}"),
        format!("# seed: {}", cfg.seed),
        format!("# config_hash: {}", cfg.hash()),
    ]
}

/// Writes `meta` lines followed by a CSV of `rows` (header from the
/// field names).
pub fn write_csv<T: Serialize>(path: &Path, meta: &[String], rows: &[T]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for line in meta {
        writeln!(out, "{line}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

/// Creates the output directory and returns the path of `name` inside it.
pub fn output_path(cfg: &ExperimentConfig, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(&cfg.output.dir)?;
    Ok(cfg.output.dir.join(name))
}
