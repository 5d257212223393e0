use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square M-QAM constellation on the unnormalized odd-integer lattice.
///
/// Each real dimension takes values in `{-ω, …, -1, 1, …, ω}` with
/// `ω = √M − 1`; per-dimension bit labels follow a binary-reflected Gray
/// code over the ascending levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct QamConstellation {
    order: usize,
    side: usize,
}

impl QamConstellation {
    pub fn new(order: usize) -> Result<Self> {
        let side = match order {
            4 => 2,
            16 => 4,
            64 => 8,
            256 => 16,
            _ => return Err(Error::Modulation(order)),
        };
        Ok(QamConstellation { order, side })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of levels per real dimension, `√M`.
    pub fn side(&self) -> usize {
        self.side
    }

    /// Largest level magnitude `ω = √M − 1`.
    pub fn omega(&self) -> u32 {
        (self.side - 1) as u32
    }

    pub fn bits_per_dim(&self) -> u32 {
        self.side.trailing_zeros()
    }

    pub fn bits_per_symbol(&self) -> u32 {
        2 * self.bits_per_dim()
    }

    /// Ascending levels of one real dimension.
    pub fn levels(&self) -> Vec<f64> {
        (0..self.side).map(|i| self.level(i)).collect()
    }

    #[inline]
    pub fn level(&self, index: usize) -> f64 {
        (2 * index) as f64 - self.omega() as f64
    }

    /// Average complex symbol energy `E_s = 2(M − 1)/3`.
    pub fn symbol_energy(&self) -> f64 {
        2.0 * (self.order as f64 - 1.0) / 3.0
    }

    /// Average energy per real dimension, `E_s / 2`.
    pub fn dim_energy(&self) -> f64 {
        self.symbol_energy() / 2.0
    }

    /// Nearest level; exact midpoints round toward +∞ (so 0 maps to +1).
    #[inline]
    pub fn quantize(&self, v: f64) -> f64 {
        let w = self.omega() as f64;
        if v.is_nan() {
            return 1.0;
        }
        let q = 2.0 * (v / 2.0).floor() + 1.0;
        q.clamp(-w, w)
    }

    pub fn quantize_vec(&self, v: &[f64]) -> Vec<f64> {
        v.iter().map(|&x| self.quantize(x)).collect()
    }

    /// Index of an exact level, or an error for off-lattice values.
    pub fn level_index(&self, v: f64) -> Result<usize> {
        let idx = (v + self.omega() as f64) / 2.0;
        if idx.fract() == 0.0 && idx >= 0.0 && (idx as usize) < self.side {
            Ok(idx as usize)
        } else {
            Err(Error::NotOnConstellation(v))
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.level_index(v).is_ok()
    }

    /// Gray label of the level at `index`.
    #[inline]
    pub fn gray_label(&self, index: usize) -> u32 {
        (index ^ (index >> 1)) as u32
    }
}

impl TryFrom<usize> for QamConstellation {
    type Error = Error;

    fn try_from(order: usize) -> Result<Self> {
        Self::new(order)
    }
}

impl From<QamConstellation> for usize {
    fn from(c: QamConstellation) -> usize {
        c.order
    }
}
