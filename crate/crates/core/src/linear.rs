//! Linear baseline detectors on the real-expanded model: LMMSE and
//! optimally ordered MMSE-SIC. Their quantized outputs seed the delta-Ising
//! searches.

use crate::error::Result;
use crate::mimo::{ml_objective, RealMimoInstance};
use crate::numerics::{dot, Cholesky};

/// Output of a linear detector.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearEstimate {
    /// Unquantized estimate (for SIC, the soft value at detection time).
    pub raw: Vec<f64>,
    /// Per-component nearest constellation level.
    pub quantized: Vec<f64>,
    /// `‖y − H·quantized‖²`.
    pub objective: f64,
}

/// Diagonal loading of the real-model Gram matrix: per-real-dimension noise
/// variance over per-real-dimension symbol energy.
pub fn mmse_regularizer(inst: &RealMimoInstance) -> f64 {
    (inst.noise_var / 2.0) / inst.constellation.dim_energy()
}

/// `(HᵀH + ρI)⁻¹ Hᵀy`, quantized per component.
pub fn mmse(inst: &RealMimoInstance) -> Result<LinearEstimate> {
    let mut gram = inst.h.gram();
    gram.add_diagonal(mmse_regularizer(inst));
    let raw = Cholesky::new(&gram)?.solve(&inst.h.tr_matvec(&inst.y));
    finish(inst, raw)
}

/// MMSE-SIC over the `2·Nt` real streams. At every step the remaining
/// stream with the smallest `[(HᵀH + ρI)⁻¹]_kk` (highest post-detection
/// SINR) is detected, quantized and cancelled.
pub fn mmse_sic(inst: &RealMimoInstance) -> Result<LinearEstimate> {
    let n = inst.dim();
    let rho = mmse_regularizer(inst);
    let mut active: Vec<usize> = (0..n).collect();
    let mut residual = inst.y.clone();
    let mut raw = vec![0.0; n];
    let mut quantized = vec![0.0; n];

    while !active.is_empty() {
        let ha = inst.h.select_columns(&active);
        let mut gram = ha.gram();
        gram.add_diagonal(rho);
        let inv = Cholesky::new(&gram)?.inverse();
        let pick = (0..active.len())
            .min_by(|&a, &b| inv[(a, a)].total_cmp(&inv[(b, b)]))
            .expect("non-empty");
        let soft = dot(inv.row(pick), &ha.tr_matvec(&residual));
        let col = active.remove(pick);
        let q = inst.constellation.quantize(soft);
        raw[col] = soft;
        quantized[col] = q;
        for (r, row) in residual.iter_mut().zip(0..inst.h.rows()) {
            *r -= q * inst.h[(row, col)];
        }
    }
    let objective = ml_objective(inst, &quantized)?;
    Ok(LinearEstimate {
        raw,
        quantized,
        objective,
    })
}

fn finish(inst: &RealMimoInstance, raw: Vec<f64>) -> Result<LinearEstimate> {
    let quantized = inst.constellation.quantize_vec(&raw);
    let objective = ml_objective(inst, &quantized)?;
    Ok(LinearEstimate {
        raw,
        quantized,
        objective,
    })
}
