//! BER sweeps: every selected detector at every SNR point.

use serde::Serialize;

use crate::config::{Detector, ExperimentConfig, Purpose};
use crate::error::Result;
use crate::experiment::{evaluate_point, ChannelSourceData, InstanceResult};
use crate::output::{wilson_interval, Z_999};

/// One `(SNR, detector)` row of a BER table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerRow {
    pub snr_db: f64,
    pub detector: Detector,
    pub instances: usize,
    pub bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
    /// 99.9% Wilson interval.
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_objective: f64,
    pub mean_anneals: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnrPoint {
    pub snr_db: f64,
    pub results: Vec<InstanceResult>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<BerRow>,
    pub points: Vec<SnrPoint>,
}

pub fn run_ber_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate(Purpose::Sweep)?;
    let source = ChannelSourceData::open(cfg)?;
    let count = cfg.instances();
    let per_instance = cfg.bits_per_instance();
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for (k, &snr) in cfg.sweep.snr_db.iter().enumerate() {
        let results = evaluate_point(cfg, &source, k, snr, &cfg.sweep.detectors, count)?;
        for &d in &cfg.sweep.detectors {
            let outcomes: Vec<_> = results.iter().filter_map(|r| r.get(d)).collect();
            let bits = per_instance * outcomes.len() as u64;
            let errors: u64 = outcomes.iter().map(|o| o.bit_errors).sum();
            let (lo, hi) = wilson_interval(errors, bits, Z_999);
            let n = outcomes.len() as f64;
            rows.push(BerRow {
                snr_db: snr,
                detector: d,
                instances: outcomes.len(),
                bits,
                bit_errors: errors,
                ber: errors as f64 / bits as f64,
                ci_low: lo,
                ci_high: hi,
                mean_objective: outcomes.iter().map(|o| o.objective).sum::<f64>() / n,
                mean_anneals: outcomes.iter().map(|o| o.anneals as f64).sum::<f64>() / n,
            });
        }
        points.push(SnrPoint { snr_db: snr, results });
    }
    Ok(SweepResult { rows, points })
}
