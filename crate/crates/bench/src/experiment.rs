//! Instance generation and per-instance detector evaluation.
//!
//! Instance `i` is drawn from stream `(seed, 0).child(i)` regardless of the
//! SNR, so every SNR point sees the same channels and symbols with noise
//! scaled accordingly. Detector randomness comes from
//! `(seed, 1).derive([snr index, i]).child(detector)`.

use mdi_core::ising::{build_transform, TransformKind};
use mdi_core::linear::{mmse, mmse_sic, LinearEstimate};
use mdi_core::mdi::{delta_search, mdi_detect_real};
use mdi_core::mimo::{
    bit_error_count, instance_from_channel, ml_objective, ml_oracle, rayleigh_instance, read_trace, real_expand,
    ChannelTrace, QamConstellation, RealMimoInstance,
};
use mdi_core::numerics::RngStream;
use rayon::prelude::*;

use crate::config::{ChannelSource, Detector, ExperimentConfig, GuessKind};
use crate::error::{BenchError, Result};

/// Where channels come from.
#[derive(Debug, Clone)]
pub struct ChannelSourceData {
    trace: Option<ChannelTrace>,
}

impl ChannelSourceData {
    pub fn open(cfg: &ExperimentConfig) -> Result<Self> {
        let trace = match (cfg.channel.source, &cfg.channel.trace) {
            (ChannelSource::Rayleigh, _) => None,
            (ChannelSource::Trace, None) => {
                return Err(BenchError::Config("channel: trace source without a path".into()))
            }
            (ChannelSource::Trace, Some(path)) => {
                let t = read_trace(path)?;
                if (t.header.nt, t.header.nr) != (cfg.system.nt, cfg.system.nr) {
                    return Err(BenchError::Config(format!(
                        "trace {} holds {}x{} channels, config asks for nr={} nt={}",
                        path.display(),
                        t.header.nr,
                        t.header.nt,
                        cfg.system.nr,
                        cfg.system.nt
                    )));
                }
                Some(t)
            }
        };
        Ok(ChannelSourceData { trace })
    }

    /// Fails when a trace holds fewer than `count` channels.
    pub fn ensure(&self, count: usize) -> Result<()> {
        match &self.trace {
            Some(t) if t.channels.len() < count => Err(BenchError::Runtime(format!(
                "trace exhausted: {count} instances requested, {} channels available",
                t.channels.len()
            ))),
            _ => Ok(()),
        }
    }

    pub fn instance(
        &self,
        cfg: &ExperimentConfig,
        q: QamConstellation,
        snr_db: f64,
        index: usize,
    ) -> Result<RealMimoInstance> {
        let stream = RngStream::new(cfg.seed, 0).child(index as u64);
        let c = match &self.trace {
            None => rayleigh_instance(stream, cfg.system.nt, cfg.system.nr, q, snr_db)?,
            Some(t) => {
                let channel = t.channels.get(index).cloned().ok_or_else(|| {
                    BenchError::Runtime(format!("trace exhausted at instance {index}"))
                })?;
                instance_from_channel(stream, channel, q, snr_db)?
            }
        };
        Ok(real_expand(&c))
    }
}

/// One detector's result on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub detector: Detector,
    pub symbols: Vec<f64>,
    pub objective: f64,
    pub bit_errors: u64,
    pub anneals: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceResult {
    pub index: usize,
    /// Same order as the requested detectors.
    pub outcomes: Vec<Outcome>,
}

impl InstanceResult {
    pub fn get(&self, d: Detector) -> Option<&Outcome> {
        self.outcomes.iter().find(|o| o.detector == d)
    }
}

/// Runs `detectors` on one instance.
pub fn evaluate_instance(
    cfg: &ExperimentConfig,
    inst: &RealMimoInstance,
    detectors: &[Detector],
    stream: RngStream,
) -> Result<Vec<Outcome>> {
    let truth = inst
        .x
        .as_deref()
        .ok_or_else(|| BenchError::Runtime("instance without transmitted symbols".into()))?;
    let mut lin_m: Option<LinearEstimate> = None;
    let mut lin_s: Option<LinearEstimate> = None;
    let mut linear = |kind: GuessKind| -> Result<Vec<f64>> {
        let slot = match kind {
            GuessKind::Mmse => &mut lin_m,
            GuessKind::MmseSic => &mut lin_s,
        };
        if slot.is_none() {
            *slot = Some(match kind {
                GuessKind::Mmse => mmse(inst)?,
                GuessKind::MmseSic => mmse_sic(inst)?,
            });
        }
        Ok(slot.as_ref().unwrap().quantized.clone())
    };

    let nt = inst.dim() / 2;
    detectors
        .iter()
        .map(|&d| {
            let s = stream.child(d.stream_id());
            let (symbols, anneals) = match d {
                Detector::Mmse => (linear(GuessKind::Mmse)?, 0),
                Detector::MmseSic => (linear(GuessKind::MmseSic)?, 0),
                Detector::Di | Detector::Ddi => {
                    let kind = if d == Detector::Di {
                        TransformKind::Legacy
                    } else {
                        TransformKind::Degenerate
                    };
                    let guess = linear(cfg.search.guess)?;
                    let t = build_transform(kind, cfg.search.radius, nt)?;
                    let out = delta_search(inst, &guess, &t, cfg.search.anneals, &cfg.cim, s)?;
                    (out.best.symbols, cfg.search.anneals)
                }
                Detector::Mdi => {
                    let rep = mdi_detect_real(inst, &cfg.mdi, &cfg.cim, s)?;
                    (rep.real_symbols, rep.anneals_used)
                }
                Detector::Oracle => (ml_oracle(inst)?, 0),
            };
            Ok(Outcome {
                detector: d,
                objective: ml_objective(inst, &symbols)?,
                bit_errors: bit_error_count(truth, &symbols, &inst.constellation)?,
                symbols,
                anneals,
            })
        })
        .collect()
}

/// Evaluates `count` instances at one SNR point in parallel; results are in
/// instance order.
pub fn evaluate_point(
    cfg: &ExperimentConfig,
    source: &ChannelSourceData,
    snr_index: usize,
    snr_db: f64,
    detectors: &[Detector],
    count: usize,
) -> Result<Vec<InstanceResult>> {
    source.ensure(count)?;
    let q = cfg.constellation()?;
    let base = RngStream::new(cfg.seed, 1);
    (0..count)
        .into_par_iter()
        .map(|i| {
            let inst = source.instance(cfg, q, snr_db, i)?;
            let stream = base.derive(&[snr_index as u64, i as u64]);
            Ok(InstanceResult {
                index: i,
                outcomes: evaluate_instance(cfg, &inst, detectors, stream)?,
            })
        })
        .collect()
}
