//! Coupled plots: instances ranked by one metric, with a second metric
//! attached to a uniformly spaced subset of ranks.

use serde::Serialize;

use crate::config::{ExperimentConfig, Metric, MetricKind, Purpose};
use crate::error::Result;
use crate::experiment::{evaluate_point, ChannelSourceData};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoupledPlotRecord {
    pub snr_db: f64,
    pub rank: usize,
    pub instance: usize,
    pub e1: f64,
    /// Present on sampled ranks only.
    pub e2: Option<f64>,
    pub sampled: bool,
}

/// Per-SNR metric values, indexed by instance.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledPoint {
    pub snr_db: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub records: Vec<CoupledPlotRecord>,
}

/// Ranks instances by `e1` (stable, so ties keep instance order) and marks
/// every `⌈n / samples⌉`-th rank as sampled.
pub fn coupled_records(snr_db: f64, e1: &[f64], e2: &[f64], samples: usize) -> Vec<CoupledPlotRecord> {
    assert_eq!(e1.len(), e2.len());
    let n = e1.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| e1[i].total_cmp(&e1[j]));
    let stride = n.div_ceil(samples.max(1)).max(1);
    order
        .into_iter()
        .enumerate()
        .map(|(rank, i)| {
            let sampled = samples > 0 && rank % stride == 0;
            CoupledPlotRecord {
                snr_db,
                rank,
                instance: i,
                e1: e1[i],
                e2: sampled.then_some(e2[i]),
                sampled,
            }
        })
        .collect()
}

pub fn run_coupled_plot(cfg: &ExperimentConfig) -> Result<Vec<CoupledPoint>> {
    cfg.validate(Purpose::Coupled)?;
    let a = Metric::parse(&cfg.coupled.metric_a)?;
    let b = Metric::parse(&cfg.coupled.metric_b)?;
    let mut detectors = vec![a.detector];
    if b.detector != a.detector {
        detectors.push(b.detector);
    }
    let source = ChannelSourceData::open(cfg)?;
    let count = cfg.instances();
    let mut points = Vec::new();
    for (k, &snr) in cfg.sweep.snr_db.iter().enumerate() {
        let results = evaluate_point(cfg, &source, k, snr, &detectors, count)?;
        let value = |m: Metric| -> Vec<f64> {
            results
                .iter()
                .map(|r| {
                    let o = r.get(m.detector).expect("detector was evaluated");
                    match m.kind {
                        MetricKind::Bits => o.bit_errors as f64,
                        MetricKind::Objective => o.objective,
                    }
                })
                .collect()
        };
        let (va, vb) = (value(a), value(b));
        let records = coupled_records(snr, &va, &vb, cfg.coupled.samples);
        points.push(CoupledPoint {
            snr_db: snr,
            a: va,
            b: vb,
            records,
        });
    }
    Ok(points)
}
