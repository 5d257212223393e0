//! Experiment configuration: one TOML document with a section per module.
//!
//! Every field has a default, so an empty file is a valid (4×4 16-QAM)
//! experiment. [`ExperimentConfig::canonical`] is the fixed serialization
//! used for hashing and golden files.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mdi_core::cim::CimParams;
use mdi_core::mdi::MdiConfig;
use mdi_core::mimo::{QamConstellation, ORACLE_LIMIT};
use mdi_core::radius::RadiusHeuristic;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub system: SystemConfig,
    pub channel: ChannelConfig,
    pub sweep: SweepConfig,
    pub mdi: MdiConfig,
    pub cim: CimParams,
    pub search: SearchConfig,
    pub coupled: CoupledConfig,
    pub radius_report: RadiusReportConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    /// Users (transmit streams).
    pub nt: usize,
    /// Receive antennas.
    pub nr: usize,
    /// QAM order `M`.
    pub modulation: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelSource {
    Rayleigh,
    Trace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub source: ChannelSource,
    /// Channel trace file, required when `source = "trace"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Detector {
    Mmse,
    MmseSic,
    /// Single delta-Ising search with the legacy transform.
    Di,
    /// Single delta-Ising search with the degenerate transform.
    Ddi,
    Mdi,
    Oracle,
}

impl Detector {
    pub const ALL: [Detector; 6] = [
        Detector::Mmse,
        Detector::MmseSic,
        Detector::Di,
        Detector::Ddi,
        Detector::Mdi,
        Detector::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Detector::Mmse => "mmse",
            Detector::MmseSic => "mmse-sic",
            Detector::Di => "di",
            Detector::Ddi => "ddi",
            Detector::Mdi => "mdi",
            Detector::Oracle => "oracle",
        }
    }

    /// Stable id used to derive per-detector random streams.
    pub(crate) fn stream_id(self) -> u64 {
        self as u64
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Detector {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        Detector::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| BenchError::Config(format!("unknown detector `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub snr_db: Vec<f64>,
    pub detectors: Vec<Detector>,
    /// Bit budget per SNR point; ignored when `instances` is set.
    pub bits: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instances: Option<usize>,
}

/// Which linear estimate seeds a single delta-Ising search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GuessKind {
    Mmse,
    MmseSic,
}

/// Parameters of the single-search `di` / `ddi` detectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub guess: GuessKind,
    pub radius: u32,
    pub anneals: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoupledConfig {
    /// `bits:<detector>` or `objective:<detector>`.
    pub metric_a: String,
    pub metric_b: String,
    /// Number of ranks that carry an `E₂` value.
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadiusReportConfig {
    pub heuristics: Vec<RadiusHeuristic>,
    pub guess: GuessKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            nt: 4,
            nr: 4,
            modulation: 16,
        }
    }
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            source: ChannelSource::Rayleigh,
            trace: None,
        }
    }
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            snr_db: vec![10.0, 15.0, 20.0],
            detectors: vec![Detector::Mmse, Detector::MmseSic, Detector::Mdi],
            bits: 1_000_000,
            instances: None,
        }
    }
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            guess: GuessKind::Mmse,
            radius: 2,
            anneals: 64,
        }
    }
}

impl Default for CoupledConfig {
    fn default() -> Self {
        CoupledConfig {
            metric_a: "bits:di".into(),
            metric_b: "bits:ddi".into(),
            samples: 100,
        }
    }
}

impl Default for RadiusReportConfig {
    fn default() -> Self {
        RadiusReportConfig {
            heuristics: RadiusHeuristic::ALL.to_vec(),
            guess: GuessKind::MmseSic,
        }
    }
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: ".".into() }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 1,
            system: SystemConfig::default(),
            channel: ChannelConfig::default(),
            sweep: SweepConfig::default(),
            mdi: MdiConfig::default(),
            cim: CimParams::default(),
            search: SearchConfig::default(),
            coupled: CoupledConfig::default(),
            radius_report: RadiusReportConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

/// Which checks [`ExperimentConfig::validate`] applies beyond the basics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Sweep,
    Coupled,
    RadiusReport,
}

impl ExperimentConfig {
    /// Parses a document and applies `key=value` overrides (dotted keys,
    /// values in TOML syntax; bare words are taken as strings).
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self> {
        let mut doc: toml::Table =
            toml::from_str(text).map_err(|e| BenchError::Config(format!("config: {e}")))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        ExperimentConfig::deserialize(toml::Value::Table(doc))
            .map_err(|e| BenchError::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, overrides)
    }

    /// Fixed serialization: every field, in declaration order.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }

    /// Hex SHA-256 of the canonical form with the output location left
    /// out, so the same experiment hashes equally wherever it is written.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = OutputConfig::default();
        Sha256::digest(c.canonical().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn constellation(&self) -> Result<QamConstellation> {
        QamConstellation::new(self.system.modulation).map_err(|e| BenchError::Config(e.to_string()))
    }

    /// Instances per SNR point: explicit count, or enough to reach the bit
    /// budget.
    pub fn instances(&self) -> usize {
        self.sweep.instances.unwrap_or_else(|| {
            let per = self.bits_per_instance().max(1);
            self.sweep.bits.div_ceil(per) as usize
        })
    }

    pub fn bits_per_instance(&self) -> u64 {
        let bits = (self.system.modulation.max(2) as f64).log2().round() as u64;
        self.system.nt as u64 * bits
    }

    pub fn validate(&self, purpose: Purpose) -> Result<()> {
        let bad = |m: String| Err(BenchError::Config(m));
        let q = self.constellation()?;
        let SystemConfig { nt, nr, .. } = self.system;
        if nt == 0 || nr < nt {
            return bad(format!("system: need 1 <= nt <= nr (got nt={nt}, nr={nr})"));
        }
        self.mdi.validate().map_err(|e| BenchError::Config(e.to_string()))?;
        self.cim.validate().map_err(|e| BenchError::Config(e.to_string()))?;
        if self.sweep.snr_db.is_empty() || self.sweep.snr_db.iter().any(|s| s.is_nan() || *s == f64::NEG_INFINITY) {
            return bad("sweep: snr_db must be a non-empty list of numbers".into());
        }
        if self.instances() == 0 {
            return bad("sweep: at least one instance is required".into());
        }
        match (self.channel.source, &self.channel.trace) {
            (ChannelSource::Trace, None) => return bad("channel: source = \"trace\" needs a trace path".into()),
            (ChannelSource::Trace, Some(p)) if !p.exists() => {
                return bad(format!("channel: trace file {} does not exist", p.display()))
            }
            _ => {}
        }
        let detectors: Vec<Detector> = match purpose {
            Purpose::Sweep => {
                if self.sweep.detectors.is_empty() {
                    return bad("sweep: no detectors selected".into());
                }
                self.sweep.detectors.clone()
            }
            Purpose::Coupled => {
                let a = Metric::parse(&self.coupled.metric_a)?;
                let b = Metric::parse(&self.coupled.metric_b)?;
                if a.kind != b.kind {
                    return bad(format!(
                        "coupled: metrics `{}` and `{}` have different units",
                        self.coupled.metric_a, self.coupled.metric_b
                    ));
                }
                vec![a.detector, b.detector]
            }
            Purpose::RadiusReport => {
                if self.radius_report.heuristics.is_empty() {
                    return bad("radius_report: no heuristics selected".into());
                }
                vec![Detector::Oracle]
            }
        };
        let lattice = (q.side() as u128).saturating_pow(2 * nt as u32);
        if detectors.contains(&Detector::Oracle) && lattice > ORACLE_LIMIT {
            return bad(format!(
                "oracle needs {lattice} candidates, above the limit of {ORACLE_LIMIT}"
            ));
        }
        let single = detectors.iter().any(|d| matches!(d, Detector::Di | Detector::Ddi));
        if single && (self.search.radius == 0 || self.search.anneals == 0) {
            return bad("search: radius and anneals must be at least 1".into());
        }
        if detectors.contains(&Detector::Di) && self.search.radius > 2 {
            return bad("search: the legacy transform (di) supports radius 1 or 2 only".into());
        }
        Ok(())
    }
}

fn apply_override(doc: &mut toml::Table, item: &str) -> Result<()> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| BenchError::Config(format!("override `{item}` is not key=value")))?;
    let (key, raw) = (key.trim(), raw.trim());
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|k| !k.is_empty());
    let Some(last) = last else {
        return Err(BenchError::Config(format!("override `{item}` has an empty key")));
    };
    let mut table = doc;
    for p in parts {
        table = table
            .entry(p)
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| BenchError::Config(format!("override `{item}`: `{p}` is not a section")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    Bits,
    Objective,
}

/// A per-instance quantity for coupled plots, written `bits:<detector>`
/// or `objective:<detector>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Metric {
    pub kind: MetricKind,
    pub detector: Detector,
}

impl Metric {
    pub fn parse(s: &str) -> Result<Self> {
        let (kind, det) = s
            .split_once(':')
            .ok_or_else(|| BenchError::Config(format!("metric `{s}` is not kind:detector")))?;
        let kind = match kind {
            "bits" => MetricKind::Bits,
            "objective" => MetricKind::Objective,
            other => return Err(BenchError::Config(format!("unknown metric kind `{other}`"))),
        };
        Ok(Metric {
            kind,
            detector: det.parse()?,
        })
    }
}
