//! Search-radius estimation from the channel spectrum and the residual of
//! the current guess.
//!
//! Any correction `d` that improves on the guess satisfies
//! `dᵀHᵀHd < 2ỹᵀHd`, which forces `λ_min‖d‖ < 2‖Hᵀỹ‖`. Every component of
//! an improving correction is therefore bounded by `Γ = 2‖Hᵀỹ‖/λ_min`.
//! Replacing `λ_min` by the mean or maximum eigenvalue gives smaller, no
//! longer guaranteed, radii.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mimo::{ml_oracle, QamConstellation, RealMimoInstance};
use crate::numerics::{norm_sq, sym_eigenvalues};

/// Which eigenvalue statistic of `HᵀH` divides the residual correlation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadiusHeuristic {
    Min,
    Mean,
    Max,
}

impl RadiusHeuristic {
    pub const ALL: [RadiusHeuristic; 3] = [Self::Min, Self::Mean, Self::Max];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Min => "min",
            Self::Mean => "mean",
            Self::Max => "max",
        }
    }
}

impl fmt::Display for RadiusHeuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for RadiusHeuristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(Self::Min),
            "mean" => Ok(Self::Mean),
            "max" => Ok(Self::Max),
            _ => Err(Error::InvalidParameter(format!("unknown heuristic '{s}'"))),
        }
    }
}

/// Eigenvalues of `HᵀH`, computed once per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpectrum {
    eigenvalues: Vec<f64>,
}

impl ChannelSpectrum {
    pub fn new(inst: &RealMimoInstance) -> Result<Self> {
        Ok(ChannelSpectrum {
            eigenvalues: sym_eigenvalues(&inst.h.gram())?,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn statistic(&self, heuristic: RadiusHeuristic) -> f64 {
        let e = &self.eigenvalues;
        match heuristic {
            RadiusHeuristic::Min => e[0],
            RadiusHeuristic::Mean => e.iter().sum::<f64>() / e.len() as f64,
            RadiusHeuristic::Max => e[e.len() - 1],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusEstimate {
    /// `Γ = 2‖Hᵀỹ‖ / λ`
    pub gamma: f64,
    pub heuristic: RadiusHeuristic,
    /// Search radius `R`: corrections range over `{−2R, …, 2R}`.
    pub radius: u32,
    /// `R == 0`: the guess cannot be improved according to the estimate.
    pub skipped: bool,
}

/// `R = ω` when `2ω ≤ Γ`, otherwise the largest `R` with `2R ≤ Γ`.
pub fn radius_from_gamma(gamma: f64, constellation: &QamConstellation) -> u32 {
    let omega = constellation.omega();
    if gamma >= f64::from(2 * omega) {
        omega
    } else if gamma > 0.0 {
        (gamma / 2.0).floor() as u32
    } else {
        0
    }
}

pub fn estimate_radius_with(
    spectrum: &ChannelSpectrum,
    inst: &RealMimoInstance,
    guess: &[f64],
    heuristic: RadiusHeuristic,
) -> Result<RadiusEstimate> {
    if guess.len() != inst.dim() {
        return Err(Error::Dimension("guess length".into()));
    }
    let lambda = spectrum.statistic(heuristic);
    if lambda.is_nan() || lambda <= 1e-12 {
        return Err(Error::DegenerateChannel(lambda));
    }
    let correlation = norm_sq(&inst.h.tr_matvec(&inst.residual(guess))).sqrt();
    let gamma = 2.0 * correlation / lambda;
    let radius = radius_from_gamma(gamma, &inst.constellation);
    Ok(RadiusEstimate {
        gamma,
        heuristic,
        radius,
        skipped: radius == 0,
    })
}

pub fn estimate_radius(
    inst: &RealMimoInstance,
    guess: &[f64],
    heuristic: RadiusHeuristic,
) -> Result<RadiusEstimate> {
    estimate_radius_with(&ChannelSpectrum::new(inst)?, inst, guess, heuristic)
}

/// Whether the exact ML solution lies within `D_R` of `guess` in every
/// coordinate. Exhaustive, so limited to oracle-tractable instances.
pub fn soundness_check(inst: &RealMimoInstance, guess: &[f64], radius: u32) -> Result<bool> {
    let best = ml_oracle(inst)?;
    Ok(within_radius(&best, guess, radius))
}

/// `max_i |a_i − b_i| ≤ 2R`.
pub fn within_radius(a: &[f64], b: &[f64], radius: u32) -> bool {
    let limit = 2.0 * f64::from(radius);
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= limit)
}
