use super::QamConstellation;
use crate::error::{Error, Result};

/// Bit errors between two real-expanded symbol vectors under per-dimension
/// Gray labelling.
pub fn bit_error_count(truth: &[f64], est: &[f64], constellation: &QamConstellation) -> Result<u64> {
    if truth.len() != est.len() {
        return Err(Error::Dimension(format!(
            "bit error count over vectors of length {} and {}",
            truth.len(),
            est.len()
        )));
    }
    truth.iter().zip(est).try_fold(0u64, |acc, (&a, &b)| {
        let la = constellation.gray_label(constellation.level_index(a)?);
        let lb = constellation.gray_label(constellation.level_index(b)?);
        Ok(acc + u64::from((la ^ lb).count_ones()))
    })
}
