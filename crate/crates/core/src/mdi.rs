//! Multi-stage delta-Ising detection.
//!
//! Two guess tracks are seeded with the MMSE and MMSE-SIC estimates. Every
//! stage estimates a radius `R_k` per track (capped at `r_max`), searches the
//! nested spaces `D_1 … D_{R_k}` around that track's guess with one
//! degenerate delta-Ising problem each, and moves each track to the best
//! candidate found (the incumbent included). The stage anneal budget is
//! split across all sub-problems of both tracks.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cim::{run_batch, CimParams};
use crate::error::{Error, Result};
use crate::ising::{build_ising, build_transform, decode, to_aux, Candidate, DeltaTransform, TransformKind};
use crate::linear::{mmse, mmse_sic, LinearEstimate};
use crate::mimo::{complex_from_real, real_expand, ComplexMimoInstance, RealMimoInstance};
use crate::numerics::RngStream;
use crate::radius::{estimate_radius_with, ChannelSpectrum, RadiusEstimate, RadiusHeuristic};

/// `(N_s, heuristic, R_max, S)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MdiConfig {
    /// Anneals per stage.
    pub n_s: usize,
    pub heuristic: RadiusHeuristic,
    /// Largest explored Chebyshev radius.
    pub r_max: u32,
    /// Number of stages.
    pub stages: usize,
}

impl Default for MdiConfig {
    fn default() -> Self {
        MdiConfig {
            n_s: 64,
            heuristic: RadiusHeuristic::Mean,
            r_max: 3,
            stages: 8,
        }
    }
}

impl MdiConfig {
    pub fn new(n_s: usize, heuristic: RadiusHeuristic, r_max: u32, stages: usize) -> Self {
        MdiConfig {
            n_s,
            heuristic,
            r_max,
            stages,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_s == 0 || self.stages == 0 {
            return Err(Error::InvalidParameter(
                "mdi: anneals per stage and stage count must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Total anneal budget `N_a = N_s · S`.
    pub fn total_anneals(&self) -> usize {
        self.n_s * self.stages
    }

    /// Recommended parameters for the large reference system sizes. 4-QAM
    /// uses single-stage search (radius is at most 1 there anyway).
    pub fn table_preset(nt: usize, nr: usize, order: usize) -> Option<MdiConfig> {
        use RadiusHeuristic::{Max, Mean};
        let n_s = match (nt, nr) {
            (16, 16) => 64,
            (32, 32) => 128,
            (16, 32) | (32, 64) => 8,
            _ => return None,
        };
        Some(match order {
            4 => MdiConfig::new(64, Mean, 1, 1),
            16 => MdiConfig::new(n_s, Mean, 3, 8),
            64 => MdiConfig::new(n_s, Mean, 4, 8),
            256 if (nt, nr) == (32, 32) => MdiConfig::new(n_s, Max, 8, 8),
            256 => MdiConfig::new(n_s, Mean, 8, 8),
            _ => return None,
        })
    }
}

/// One delta-Ising sub-problem run during a stage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubInstanceReport {
    /// 0 for the MMSE-seeded track, 1 for the MMSE-SIC track.
    pub track: usize,
    pub radius: u32,
    pub anneals: usize,
    pub non_converged: usize,
    pub best_objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageReport {
    pub stage: usize,
    pub estimates: [RadiusEstimate; 2],
    /// Radii actually searched, after the `r_max` cap.
    pub radii: [u32; 2],
    pub sub_instances: Vec<SubInstanceReport>,
    /// Per-track incumbent objective at the end of the stage.
    pub best_objectives: [f64; 2],
    pub anneals: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionReport {
    pub symbols: Vec<Complex64>,
    /// Real-expanded `[Re; Im]` form of `symbols`.
    pub real_symbols: Vec<f64>,
    pub objective: f64,
    pub mmse: LinearEstimate,
    pub mmse_sic: LinearEstimate,
    pub stages: Vec<StageReport>,
    pub anneals_used: usize,
    /// The first stage found nothing to search on either track.
    pub skipped: bool,
}

/// Best candidate of a delta-Ising search plus bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub best: Candidate,
    pub non_converged: usize,
}

/// Runs `n_anneals` anneals of the problem for `transform` around `guess`
/// and returns the lowest-objective decoded candidate, the guess included.
/// Ties keep the guess, then the earliest anneal.
pub fn delta_search(
    inst: &RealMimoInstance,
    guess: &[f64],
    transform: &DeltaTransform,
    n_anneals: usize,
    cim: &CimParams,
    stream: RngStream,
) -> Result<SearchOutcome> {
    let problem = build_ising(inst, guess, transform)?;
    let aux = to_aux(&problem);
    let mut best = Candidate {
        symbols: guess.to_vec(),
        objective: crate::mimo::ml_objective(inst, guess)?,
    };
    let mut non_converged = 0;
    for result in run_batch(&aux, cim, n_anneals, stream) {
        if !result.converged {
            non_converged += 1;
        }
        let cand = decode(guess, transform, &result.spins.from_aux(), inst)?;
        if cand.objective < best.objective {
            best = cand;
        }
    }
    Ok(SearchOutcome {
        best,
        non_converged,
    })
}

/// Single degenerate delta-Ising search at radius `radius`.
pub fn di_detect(
    inst: &RealMimoInstance,
    guess: &[f64],
    radius: u32,
    n_anneals: usize,
    cim: &CimParams,
    stream: RngStream,
) -> Result<Candidate> {
    if radius == 0 || n_anneals == 0 {
        return Err(Error::InvalidParameter(
            "di search needs radius >= 1 and at least one anneal".into(),
        ));
    }
    let t = build_transform(TransformKind::Degenerate, radius, inst.dim() / 2)?;
    Ok(delta_search(inst, guess, &t, n_anneals, cim, stream)?.best)
}

/// Splits `n_s` anneals over sub-problems `(track, radius)` for radii
/// `1..=r1` on track 0 and `1..=r2` on track 1. Every sub-problem gets
/// `⌊n_s / (r1 + r2)⌋`; the remainder goes one each to the smallest radii
/// first. If `n_s < r1 + r2`, only the `n_s` smallest-radius sub-problems
/// get an anneal, so the total never exceeds `n_s`.
pub fn allocate_anneals(n_s: usize, r1: u32, r2: u32) -> Vec<(usize, u32, usize)> {
    let mut subs: Vec<(usize, u32)> = (1..=r1)
        .map(|r| (0, r))
        .chain((1..=r2).map(|r| (1, r)))
        .collect();
    subs.sort_by_key(|&(track, r)| (r, track));
    let count = subs.len();
    if count == 0 {
        return Vec::new();
    }
    let base = n_s / count;
    let extra = n_s % count;
    subs.into_iter()
        .enumerate()
        .map(|(i, (track, r))| (track, r, base + usize::from(i < extra)))
        .collect()
}

/// Multi-stage delta-Ising detection of a complex instance.
pub fn mdi_detect(
    inst: &ComplexMimoInstance,
    config: &MdiConfig,
    cim: &CimParams,
    stream: RngStream,
) -> Result<DetectionReport> {
    mdi_detect_real(&real_expand(inst), config, cim, stream)
}

pub fn mdi_detect_real(
    inst: &RealMimoInstance,
    config: &MdiConfig,
    cim: &CimParams,
    stream: RngStream,
) -> Result<DetectionReport> {
    config.validate()?;
    let nt = inst.dim() / 2;
    let spectrum = ChannelSpectrum::new(inst)?;
    let mmse_est = mmse(inst)?;
    let sic_est = mmse_sic(inst)?;
    let mut tracks = [
        Candidate {
            symbols: mmse_est.quantized.clone(),
            objective: mmse_est.objective,
        },
        Candidate {
            symbols: sic_est.quantized.clone(),
            objective: sic_est.objective,
        },
    ];

    let mut stages = Vec::new();
    let mut anneals_used = 0;
    for stage in 0..config.stages {
        let estimates = [
            estimate_radius_with(&spectrum, inst, &tracks[0].symbols, config.heuristic)?,
            estimate_radius_with(&spectrum, inst, &tracks[1].symbols, config.heuristic)?,
        ];
        let radii = estimates.map(|e| e.radius.min(config.r_max));
        let plan = allocate_anneals(config.n_s, radii[0], radii[1]);
        let mut next = tracks.clone();
        let mut subs = Vec::with_capacity(plan.len());
        for (track, radius, anneals) in plan {
            if anneals == 0 {
                subs.push(SubInstanceReport {
                    track,
                    radius,
                    anneals,
                    non_converged: 0,
                    best_objective: tracks[track].objective,
                });
                continue;
            }
            let t = build_transform(TransformKind::Degenerate, radius, nt)?;
            let sub_stream = stream.derive(&[stage as u64, track as u64, u64::from(radius)]);
            let out = delta_search(inst, &tracks[track].symbols, &t, anneals, cim, sub_stream)?;
            anneals_used += anneals;
            subs.push(SubInstanceReport {
                track,
                radius,
                anneals,
                non_converged: out.non_converged,
                best_objective: out.best.objective,
            });
            if out.best.objective < next[track].objective {
                next[track] = out.best;
            }
        }
        let searched = !subs.is_empty();
        stages.push(StageReport {
            stage: stage + 1,
            estimates,
            radii,
            anneals: subs.iter().map(|s| s.anneals).sum(),
            sub_instances: subs,
            best_objectives: [next[0].objective, next[1].objective],
        });
        tracks = next;
        // with nothing to search the next stage would see the same guesses
        if !searched {
            break;
        }
    }

    let skipped = stages.first().is_some_and(|s| s.sub_instances.is_empty());
    let [t0, t1] = tracks;
    let best = if t1.objective < t0.objective { t1 } else { t0 };
    Ok(DetectionReport {
        symbols: complex_from_real(&best.symbols),
        real_symbols: best.symbols,
        objective: best.objective,
        mmse: mmse_est,
        mmse_sic: sic_est,
        stages,
        anneals_used,
        skipped,
    })
}
