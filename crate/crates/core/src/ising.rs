//! Delta-Ising formulation of ML detection around an initial guess.
//!
//! A correction `d = u − guess` with entries in `D_K = {−2K, …, 2K}` is
//! encoded as `d = T s` where `T = wᵀ ⊗ I` stacks weighted identity blocks:
//! unit weights repeated `2K` times for the degenerate transform, and
//! `(2, 1, 1)` for the legacy `K = 2` transform. Expanding `‖ỹ − HTs‖²`
//! with `s_i² = 1` gives the Ising coefficients
//!
//! ```text
//! J = −zeroDiag(TᵀHᵀHT),   h = 2TᵀHᵀỹ,   constant = ‖ỹ‖² + tr(TᵀHᵀHT)
//! ```
//!
//! so that `−hᵀs − sᵀJs + constant = ‖ỹ − HTs‖²`. Because `T` is a
//! Kronecker product, couplings are never stored densely on the hot path:
//! `J x` is evaluated through the Gram matrix `HᵀH` of the `2Nt` real
//! dimensions.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mimo::{ml_objective, RealMimoInstance};
use crate::numerics::{dot, norm_sq, Matrix};

/// Spin configuration with entries in `{−1, +1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinVector(Vec<i8>);

impl SpinVector {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidParameter("spins must be +1 or -1".into()));
        }
        Ok(SpinVector(spins))
    }

    /// Signs of a real vector, with `sign(0) = +1`.
    pub fn from_signs(x: &[f64]) -> Self {
        SpinVector(x.iter().map(|&v| if v < 0.0 { -1 } else { 1 }).collect())
    }

    pub fn all_up(n: usize) -> Self {
        SpinVector(vec![1; n])
    }

    /// Spin configuration number `code`, bit `i` set meaning `s_i = −1`.
    pub fn from_index(n: usize, code: u64) -> Self {
        SpinVector((0..n).map(|i| if code >> i & 1 == 1 { -1 } else { 1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&s| f64::from(s)).collect()
    }

    pub fn negated(&self) -> Self {
        SpinVector(self.0.iter().map(|s| -s).collect())
    }

    /// Maps an auxiliary-form readout `(s̄, s̄_a)` to `ŝ = s̄·s̄_a`,
    /// dropping the trailing auxiliary spin.
    pub fn from_aux(&self) -> Self {
        let (&sa, body) = self.0.split_last().expect("aux readout has at least one spin");
        SpinVector(body.iter().map(|s| s * sa).collect())
    }
}

/// Even-integer correction set `D_R = {−2R, …, 0, …, 2R}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub radius: u32,
}

impl SearchSpace {
    pub fn values(&self) -> Vec<i64> {
        let r = i64::from(self.radius);
        (-r..=r).map(|k| 2 * k).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransformKind {
    /// `2K` unit-weight spins per dimension.
    Degenerate,
    /// Weighted spins of the earlier formulation: `[I I]` for `K = 1`,
    /// `[2I I I]` for `K = 2`.
    Legacy,
}

/// The map `s ↦ Ts` from spins to corrections.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaTransform {
    kind: TransformKind,
    radius: u32,
    dims: usize,
    weights: Vec<f64>,
}

pub fn build_transform(kind: TransformKind, radius: u32, nt: usize) -> Result<DeltaTransform> {
    if radius == 0 {
        return Err(Error::InvalidParameter("transform radius must be at least 1".into()));
    }
    let weights = match (kind, radius) {
        (TransformKind::Degenerate, k) => vec![1.0; 2 * k as usize],
        (TransformKind::Legacy, 1) => vec![1.0, 1.0],
        (TransformKind::Legacy, 2) => vec![2.0, 1.0, 1.0],
        (TransformKind::Legacy, k) => {
            return Err(Error::UnsupportedTransform(format!(
                "legacy delta-Ising transform is only defined for K <= 2 (got {k})"
            )))
        }
    };
    Ok(DeltaTransform {
        kind,
        radius,
        dims: 2 * nt,
        weights,
    })
}

impl DeltaTransform {
    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    /// Number of real dimensions `2Nt` (rows of `T`).
    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Number of spins (columns of `T`).
    pub fn width(&self) -> usize {
        self.dims * self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn search_space(&self) -> SearchSpace {
        SearchSpace {
            radius: self.radius,
        }
    }

    /// `d = T s`.
    pub fn apply(&self, s: &SpinVector) -> Vec<f64> {
        assert_eq!(s.len(), self.width(), "spin vector width");
        let mut d = vec![0.0; self.dims];
        for (b, &w) in self.weights.iter().enumerate() {
            let block = &s.as_slice()[b * self.dims..(b + 1) * self.dims];
            for (di, &si) in d.iter_mut().zip(block) {
                *di += w * f64::from(si);
            }
        }
        d
    }

    pub fn matrix(&self) -> Matrix {
        let n = self.dims;
        Matrix::from_fn(n, self.width(), |r, c| {
            if c % n == r {
                self.weights[c / n]
            } else {
                0.0
            }
        })
    }

    /// A spin pattern with `T s = 0`, used when an anneal fails to converge.
    pub fn zero_correction_spins(&self) -> SpinVector {
        let block_signs: Vec<i8> = match self.kind {
            TransformKind::Degenerate => (0..self.weights.len())
                .map(|b| if b % 2 == 0 { 1 } else { -1 })
                .collect(),
            TransformKind::Legacy if self.radius == 1 => vec![1, -1],
            TransformKind::Legacy => vec![1, -1, -1],
        };
        SpinVector(
            block_signs
                .iter()
                .flat_map(|&s| std::iter::repeat_n(s, self.dims))
                .collect(),
        )
    }
}

/// Ising problem `min −hᵀs − sᵀJs` for the correction around a guess.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingProblem {
    transform: DeltaTransform,
    /// `HᵀH`
    gram: Matrix,
    /// `Hᵀỹ`
    field: Vec<f64>,
    residual_norm_sq: f64,
}

/// Builds the delta-Ising problem for corrections to `guess`, using the
/// residual `ỹ = y − H·guess`.
pub fn build_ising(inst: &RealMimoInstance, guess: &[f64], transform: &DeltaTransform) -> Result<IsingProblem> {
    if guess.len() != inst.dim() || transform.dims() != inst.dim() {
        return Err(Error::Dimension(format!(
            "guess of length {} and transform over {} dimensions for {} unknowns",
            guess.len(),
            transform.dims(),
            inst.dim()
        )));
    }
    let residual = inst.residual(guess);
    let field = inst.h.tr_matvec(&residual);
    let gram = inst.h.gram();
    debug_assert!(gram.is_symmetric(0.0));
    Ok(IsingProblem {
        transform: transform.clone(),
        gram,
        field,
        residual_norm_sq: norm_sq(&residual),
    })
}

impl IsingProblem {
    pub fn transform(&self) -> &DeltaTransform {
        &self.transform
    }

    pub fn n_spins(&self) -> usize {
        self.transform.width()
    }

    #[inline]
    fn split(&self, i: usize) -> (f64, usize) {
        let n = self.transform.dims;
        (self.transform.weights[i / n], i % n)
    }

    /// Coupling `J_ij`.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let (wi, ri) = self.split(i);
        let (wj, rj) = self.split(j);
        -wi * wj * self.gram[(ri, rj)]
    }

    /// Dense `J`.
    pub fn couplings(&self) -> Matrix {
        let n = self.n_spins();
        Matrix::from_fn(n, n, |i, j| self.coupling(i, j))
    }

    /// Bias vector `h = 2TᵀHᵀỹ`.
    pub fn biases(&self) -> Vec<f64> {
        (0..self.n_spins())
            .map(|i| {
                let (w, r) = self.split(i);
                2.0 * w * self.field[r]
            })
            .collect()
    }

    /// `‖ỹ‖² + tr(TᵀHᵀHT)`.
    pub fn constant(&self) -> f64 {
        let wsq: f64 = self.transform.weights.iter().map(|w| w * w).sum();
        self.residual_norm_sq + wsq * self.gram.trace()
    }

    /// `−hᵀs − sᵀJs`, evaluated term by term from the coefficients.
    pub fn energy(&self, s: &SpinVector) -> f64 {
        assert_eq!(s.len(), self.n_spins());
        let sf = s.to_f64();
        let h = self.biases();
        let mut quad = 0.0;
        for (i, &si) in sf.iter().enumerate() {
            for (j, &sj) in sf.iter().enumerate() {
                quad += self.coupling(i, j) * si * sj;
            }
        }
        -dot(&h, &sf) - quad
    }

    /// Plain-text dump: `N`, then `i j J_ij` for nonzero couplings with
    /// `i < j`, then `i h_i` for every spin.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        let n = self.n_spins();
        writeln!(w, "{n}")?;
        for i in 0..n {
            for j in (i + 1)..n {
                let c = self.coupling(i, j);
                if c != 0.0 {
                    writeln!(w, "{i} {j} {c:e}")?;
                }
            }
        }
        for (i, h) in self.biases().iter().enumerate() {
            writeln!(w, "{i} {h:e}")?;
        }
        Ok(())
    }
}

/// Reads the plain-text dump back into a dense symmetric `J` and `h`.
pub fn read_ising_text<R: BufRead>(r: R) -> Result<(Matrix, Vec<f64>)> {
    let bad = |m: &str| Error::InvalidParameter(format!("ising text: {m}"));
    let mut lines = r.lines();
    let n: usize = lines
        .next()
        .ok_or_else(|| bad("empty input"))??
        .trim()
        .parse()
        .map_err(|_| bad("spin count"))?;
    let mut j = Matrix::zeros(n, n);
    let mut h = vec![0.0; n];
    for line in lines {
        let line = line?;
        let tok: Vec<&str> = line.split_whitespace().collect();
        let idx = |s: &str| -> Result<usize> {
            s.parse::<usize>()
                .ok()
                .filter(|&v| v < n)
                .ok_or_else(|| bad("spin index"))
        };
        let val = |s: &str| -> Result<f64> { s.parse::<f64>().map_err(|_| bad("value")) };
        match tok.as_slice() {
            [] => {}
            [a, b, v] => {
                let (a, b, v) = (idx(a)?, idx(b)?, val(v)?);
                j[(a, b)] = v;
                j[(b, a)] = v;
            }
            [a, v] => h[idx(a)?] = val(v)?,
            _ => return Err(bad("line shape")),
        }
    }
    Ok((j, h))
}

#[derive(Debug, Clone, PartialEq)]
enum CouplingOp {
    Dense(Matrix),
    /// Auxiliary form of a delta-Ising problem: `J` through `HᵀH`, plus
    /// couplings `h/2` between each spin and the trailing auxiliary spin.
    Lifted {
        weights: Vec<f64>,
        gram: Matrix,
        field: Vec<f64>,
    },
}

/// Zero-bias Ising problem `min −sᵀJs` as consumed by the CIM.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingProblem {
    n: usize,
    op: CouplingOp,
    fallback: SpinVector,
}

/// Folds the biases into couplings with one auxiliary spin appended last:
/// `−(hᵀs)s_a − sᵀJs`.
pub fn to_aux(problem: &IsingProblem) -> CouplingProblem {
    let mut fallback = problem.transform.zero_correction_spins().0;
    fallback.push(1);
    CouplingProblem {
        n: problem.n_spins() + 1,
        op: CouplingOp::Lifted {
            weights: problem.transform.weights.clone(),
            gram: problem.gram.clone(),
            field: problem.field.clone(),
        },
        fallback: SpinVector(fallback),
    }
}

impl CouplingProblem {
    /// Wraps a symmetric zero-diagonal coupling matrix. The fallback readout
    /// for non-converged anneals is all spins up.
    pub fn from_matrix(j: Matrix) -> Result<Self> {
        if !j.is_square() || !j.is_symmetric(1e-12) || j.diagonal().iter().any(|&v| v != 0.0) {
            return Err(Error::InvalidParameter(
                "coupling matrix must be square, symmetric and zero on the diagonal".into(),
            ));
        }
        let n = j.rows();
        Ok(CouplingProblem {
            n,
            op: CouplingOp::Dense(j),
            fallback: SpinVector::all_up(n),
        })
    }

    pub fn n_spins(&self) -> usize {
        self.n
    }

    /// Readout used when an anneal does not converge.
    pub fn fallback_spins(&self) -> &SpinVector {
        &self.fallback
    }

    /// `out = J x`.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let mut scratch = Vec::new();
        self.apply_lanes::<1>(x, out, &mut scratch);
    }

    /// `J x` for `L` interleaved vectors: entry `i` of lane `l` lives at
    /// `i * L + l`. Every lane sees exactly the same sequence of floating
    /// point operations as a single-lane call.
    #[inline]
    pub fn apply_lanes<const L: usize>(&self, x: &[f64], out: &mut [f64], scratch: &mut Vec<f64>) {
        debug_assert_eq!(x.len(), self.n * L);
        debug_assert_eq!(out.len(), self.n * L);
        match &self.op {
            CouplingOp::Dense(j) => {
                for (i, o) in out.chunks_exact_mut(L).enumerate() {
                    let mut acc = [0.0f64; L];
                    for (&jij, xj) in j.row(i).iter().zip(x.chunks_exact(L)) {
                        for l in 0..L {
                            acc[l] += jij * xj[l];
                        }
                    }
                    o.copy_from_slice(&acc);
                }
            }
            CouplingOp::Lifted {
                weights,
                gram,
                field,
            } => {
                let dims = field.len();
                let xa = &x[(self.n - 1) * L..];
                scratch.clear();
                scratch.resize(dims * L, 0.0);
                let z = scratch.as_mut_slice();
                for (b, &w) in weights.iter().enumerate() {
                    let block = &x[b * dims * L..(b + 1) * dims * L];
                    for (zr, xr) in z.iter_mut().zip(block) {
                        *zr += w * xr;
                    }
                }
                let mut aux = [0.0f64; L];
                for r in 0..dims {
                    let mut gz = [0.0f64; L];
                    for (&g, zc) in gram.row(r).iter().zip(z.chunks_exact(L)) {
                        for l in 0..L {
                            gz[l] += g * zc[l];
                        }
                    }
                    let grr = gram[(r, r)];
                    let fr = field[r];
                    for l in 0..L {
                        aux[l] += fr * z[r * L + l];
                    }
                    for (b, &w) in weights.iter().enumerate() {
                        let i = (b * dims + r) * L;
                        for l in 0..L {
                            out[i + l] = w * (w * grr * x[i + l] - gz[l]) + w * fr * xa[l];
                        }
                    }
                }
                out[(self.n - 1) * L..].copy_from_slice(&aux);
            }
        }
    }

    /// Dense coupling matrix.
    pub fn matrix(&self) -> Matrix {
        match &self.op {
            CouplingOp::Dense(j) => j.clone(),
            CouplingOp::Lifted { .. } => {
                let n = self.n;
                let mut m = Matrix::zeros(n, n);
                let mut e = vec![0.0; n];
                let mut col = vec![0.0; n];
                for j in 0..n {
                    e[j] = 1.0;
                    self.apply(&e, &mut col);
                    e[j] = 0.0;
                    for i in 0..n {
                        m[(i, j)] = col[i];
                    }
                }
                m
            }
        }
    }

    /// `−sᵀJs`.
    pub fn energy(&self, s: &SpinVector) -> f64 {
        let sf = s.to_f64();
        let mut js = vec![0.0; self.n];
        self.apply(&sf, &mut js);
        -dot(&sf, &js)
    }
}

/// A decoded candidate symbol vector with its ML objective.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub symbols: Vec<f64>,
    pub objective: f64,
}

/// Maps original-problem spins to `guess + Ts`, rounded (clamped) onto the
/// constellation, and scores it.
pub fn decode(
    guess: &[f64],
    transform: &DeltaTransform,
    s: &SpinVector,
    inst: &RealMimoInstance,
) -> Result<Candidate> {
    if s.len() != transform.width() || guess.len() != transform.dims() {
        return Err(Error::Dimension(format!(
            "decode of {} spins around a guess of length {}",
            s.len(),
            guess.len()
        )));
    }
    let d = transform.apply(s);
    let symbols: Vec<f64> = guess
        .iter()
        .zip(d)
        .map(|(g, di)| inst.constellation.quantize(g + di))
        .collect();
    let objective = ml_objective(inst, &symbols)?;
    Ok(Candidate { symbols, objective })
}
