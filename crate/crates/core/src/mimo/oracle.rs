use super::RealMimoInstance;
use crate::error::{Error, Result};
use crate::numerics::norm_sq;

/// Largest lattice (`M^Nt` candidates) the exhaustive oracle will search.
pub const ORACLE_LIMIT: u128 = 1 << 24;

/// Number of lattice points `√M^(2Nt)` of an instance.
pub fn search_space_size(inst: &RealMimoInstance) -> u128 {
    (inst.constellation.side() as u128).saturating_pow(inst.dim() as u32)
}

/// Exact ML solution by exhaustive enumeration of the constellation lattice.
///
/// Candidates are visited in lexicographic order (first coordinate most
/// significant, levels ascending) and only strict improvements replace the
/// incumbent, so ties resolve to the lexicographically smallest vector.
/// Partial residuals `y − Σ_{i<k} h_i u_i` are kept per depth so each leaf
/// costs one column update.
pub fn ml_oracle(inst: &RealMimoInstance) -> Result<Vec<f64>> {
    let size = search_space_size(inst);
    if size > ORACLE_LIMIT {
        return Err(Error::SearchSpaceTooLarge {
            size,
            limit: ORACLE_LIMIT,
        });
    }
    let n = inst.dim();
    let m = inst.h.rows();
    let levels = inst.constellation.levels();
    let side = levels.len();
    let columns: Vec<Vec<f64>> = (0..n).map(|j| inst.h.column(j)).collect();

    // residuals[k] holds y minus the contribution of coordinates < k
    let mut residuals = vec![0.0; (n + 1) * m];
    residuals[..m].copy_from_slice(&inst.y);
    let mut digits = vec![0usize; n];

    let refill = |residuals: &mut [f64], digits: &[usize], from: usize| {
        for k in from..n {
            let (head, tail) = residuals.split_at_mut((k + 1) * m);
            let prev = &head[k * m..];
            let next = &mut tail[..m];
            let u = levels[digits[k]];
            for ((dst, &p), &h) in next.iter_mut().zip(prev).zip(&columns[k]) {
                *dst = p - u * h;
            }
        }
    };
    refill(&mut residuals, &digits, 0);

    let mut best = f64::INFINITY;
    let mut best_digits = digits.clone();
    loop {
        let cost = norm_sq(&residuals[n * m..]);
        if cost < best {
            best = cost;
            best_digits.copy_from_slice(&digits);
        }
        let Some(k) = (0..n).rev().find(|&k| digits[k] + 1 < side) else {
            break;
        };
        digits[k] += 1;
        digits[k + 1..].iter_mut().for_each(|d| *d = 0);
        refill(&mut residuals, &digits, k);
    }
    Ok(best_digits.into_iter().map(|d| levels[d]).collect())
}
