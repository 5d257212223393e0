//! Conversion between the binary channel-trace format and a JSON form
//! (`{"nt", "nr", "source", "channels": [[[re, im], …], …]}`, each channel
//! row-major), plus synthesis of Rayleigh traces.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use mdi_core::mimo::{rayleigh_channel, read_trace, write_trace, ChannelTrace, ComplexMatrix};
use mdi_core::numerics::RngStream;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{BenchError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsonTrace {
    pub nt: usize,
    pub nr: usize,
    pub source: String,
    pub channels: Vec<Vec<[f64; 2]>>,
}

impl From<&ChannelTrace> for JsonTrace {
    fn from(t: &ChannelTrace) -> Self {
        JsonTrace {
            nt: t.header.nt,
            nr: t.header.nr,
            source: t.header.source.clone(),
            channels: t
                .channels
                .iter()
                .map(|c| c.as_slice().iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }
}

impl TryFrom<JsonTrace> for ChannelTrace {
    type Error = BenchError;

    fn try_from(j: JsonTrace) -> Result<Self> {
        let channels = j
            .channels
            .into_iter()
            .map(|c| {
                let data = c.into_iter().map(|[re, im]| Complex64::new(re, im)).collect();
                ComplexMatrix::from_vec(j.nr, j.nt, data)
            })
            .collect::<mdi_core::Result<Vec<_>>>()?;
        Ok(ChannelTrace::new(j.nt, j.nr, j.source, channels)?)
    }
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Reads a trace in either format, chosen by the `.json` extension.
pub fn load_any(path: &Path) -> Result<ChannelTrace> {
    if is_json(path) {
        let j: JsonTrace = serde_json::from_reader(BufReader::new(File::open(path)?))
            .map_err(|e| BenchError::Runtime(format!("{}: {e}", path.display())))?;
        j.try_into()
    } else {
        Ok(read_trace(path)?)
    }
}

pub fn save_any(path: &Path, trace: &ChannelTrace) -> Result<()> {
    if is_json(path) {
        serde_json::to_writer(BufWriter::new(File::create(path)?), &JsonTrace::from(trace))?;
        Ok(())
    } else {
        Ok(write_trace(path, trace)?)
    }
}

pub fn convert(input: &Path, output: &Path) -> Result<ChannelTrace> {
    let t = load_any(input)?;
    save_any(output, &t)?;
    Ok(t)
}

/// `count` Rayleigh channels of the configured size; channel `i` uses
/// stream `(seed, 2).child(i)`.
pub fn generate(cfg: &ExperimentConfig, count: usize, output: &Path) -> Result<ChannelTrace> {
    let (nt, nr) = (cfg.system.nt, cfg.system.nr);
    let channels = (0..count)
        .map(|i| rayleigh_channel(&mut RngStream::new(cfg.seed, 2).child(i as u64).rng(), nr, nt))
        .collect();
    let t = ChannelTrace::new(nt, nr, format!("rayleigh seed={}", cfg.seed), channels)?;
    save_any(output, &t)?;
    Ok(t)
}
