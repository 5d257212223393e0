//! Radius-heuristic report: how often each heuristic sends an instance to
//! the Ising machine (`R > 0`) and how often the exact ML solution falls
//! outside the estimated search space.

use mdi_core::linear::{mmse, mmse_sic};
use mdi_core::mimo::ml_oracle;
use mdi_core::radius::{estimate_radius_with, within_radius, ChannelSpectrum, RadiusHeuristic};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, GuessKind, Purpose};
use crate::error::Result;
use crate::experiment::ChannelSourceData;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusRow {
    pub snr_db: f64,
    pub heuristic: RadiusHeuristic,
    pub instances: usize,
    /// Percentage of instances with `R > 0`.
    pub run_time_pct: f64,
    /// Percentage of instances whose ML solution lies outside `D_R`.
    pub wrong_pct: f64,
    pub mean_radius: f64,
}

pub fn run_radius_report(cfg: &ExperimentConfig) -> Result<Vec<RadiusRow>> {
    cfg.validate(Purpose::RadiusReport)?;
    let source = ChannelSourceData::open(cfg)?;
    let q = cfg.constellation()?;
    let count = cfg.instances();
    source.ensure(count)?;
    let heuristics = &cfg.radius_report.heuristics;
    let mut rows = Vec::new();
    for &snr in &cfg.sweep.snr_db {
        // per instance: (radius, wrong) for every heuristic
        let per: Vec<Vec<(u32, bool)>> = (0..count)
            .into_par_iter()
            .map(|i| -> Result<Vec<(u32, bool)>> {
                let inst = source.instance(cfg, q, snr, i)?;
                let guess = match cfg.radius_report.guess {
                    GuessKind::Mmse => mmse(&inst)?.quantized,
                    GuessKind::MmseSic => mmse_sic(&inst)?.quantized,
                };
                let spectrum = ChannelSpectrum::new(&inst)?;
                let best = ml_oracle(&inst)?;
                heuristics
                    .iter()
                    .map(|&h| {
                        let r = estimate_radius_with(&spectrum, &inst, &guess, h)?.radius;
                        Ok((r, !within_radius(&best, &guess, r)))
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        for (k, &h) in heuristics.iter().enumerate() {
            let n = count as f64;
            let run = per.iter().filter(|v| v[k].0 > 0).count() as f64;
            let wrong = per.iter().filter(|v| v[k].1).count() as f64;
            let radius: f64 = per.iter().map(|v| f64::from(v[k].0)).sum();
            rows.push(RadiusRow {
                snr_db: snr,
                heuristic: h,
                instances: count,
                run_time_pct: 100.0 * run / n,
                wrong_pct: 100.0 * wrong / n,
                mean_radius: radius / n,
            });
        }
    }
    Ok(rows)
}
