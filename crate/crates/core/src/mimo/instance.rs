use num_complex::Complex64;
use rand::Rng;

use super::QamConstellation;
use crate::error::{Error, Result};
use crate::numerics::{norm_sq, Matrix, RngStream};
use crate::numerics::normal_iter;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} complex matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("complex matrix entries"));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        ComplexMatrix { rows: n, cols: n, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }
}

/// A complex-baseband uplink instance `ỹ = H̃x̃ + n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMimoInstance {
    pub channel: ComplexMatrix,
    /// Transmitted symbols, when known.
    pub transmitted: Option<Vec<Complex64>>,
    pub received: Vec<Complex64>,
    /// Noise variance per complex dimension.
    pub noise_var: f64,
    pub constellation: QamConstellation,
}

impl ComplexMimoInstance {
    pub fn new(
        channel: ComplexMatrix,
        transmitted: Option<Vec<Complex64>>,
        received: Vec<Complex64>,
        noise_var: f64,
        constellation: QamConstellation,
    ) -> Result<Self> {
        let (nr, nt) = (channel.rows(), channel.cols());
        if nr < nt {
            return Err(Error::Dimension(format!(
                "{nr} receive antennas for {nt} users"
            )));
        }
        if received.len() != nr || transmitted.as_ref().is_some_and(|x| x.len() != nt) {
            return Err(Error::Dimension("instance vector lengths".into()));
        }
        if !noise_var.is_finite() || noise_var < 0.0 {
            return Err(Error::InvalidParameter(format!("noise variance {noise_var}")));
        }
        Ok(ComplexMimoInstance {
            channel,
            transmitted,
            received,
            noise_var,
            constellation,
        })
    }

    pub fn nt(&self) -> usize {
        self.channel.cols()
    }

    pub fn nr(&self) -> usize {
        self.channel.rows()
    }

    /// `‖ỹ − H̃ũ‖²`.
    pub fn objective(&self, u: &[Complex64]) -> f64 {
        self.channel
            .matvec(u)
            .iter()
            .zip(&self.received)
            .map(|(hu, y)| (y - hu).norm_sqr())
            .sum()
    }
}

/// Real-valued equivalent `y = Hx + n` with `H = [[Re, −Im], [Im, Re]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMimoInstance {
    pub h: Matrix,
    pub y: Vec<f64>,
    pub x: Option<Vec<f64>>,
    pub constellation: QamConstellation,
    /// Noise variance per complex dimension (half of it per real dimension).
    pub noise_var: f64,
}

impl RealMimoInstance {
    pub fn new(
        h: Matrix,
        y: Vec<f64>,
        x: Option<Vec<f64>>,
        constellation: QamConstellation,
        noise_var: f64,
    ) -> Result<Self> {
        if y.len() != h.rows() || x.as_ref().is_some_and(|x| x.len() != h.cols()) {
            return Err(Error::Dimension("real instance vector lengths".into()));
        }
        if h.rows() < h.cols() {
            return Err(Error::Dimension("fewer observations than unknowns".into()));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("received vector"));
        }
        Ok(RealMimoInstance {
            h,
            y,
            x,
            constellation,
            noise_var,
        })
    }

    /// Number of real unknowns, `2·Nt`.
    pub fn dim(&self) -> usize {
        self.h.cols()
    }

    /// `y − H u`.
    pub fn residual(&self, u: &[f64]) -> Vec<f64> {
        let hu = self.h.matvec(u);
        self.y.iter().zip(hu).map(|(y, v)| y - v).collect()
    }
}

/// `‖y − Hu‖²`.
pub fn ml_objective(inst: &RealMimoInstance, u: &[f64]) -> Result<f64> {
    if u.len() != inst.dim() {
        return Err(Error::Dimension(format!(
            "candidate of length {} for {} unknowns",
            u.len(),
            inst.dim()
        )));
    }
    Ok(norm_sq(&inst.residual(u)))
}

fn stack(v: &[Complex64]) -> Vec<f64> {
    v.iter().map(|z| z.re).chain(v.iter().map(|z| z.im)).collect()
}

fn unstack(v: &[f64]) -> Vec<Complex64> {
    let n = v.len() / 2;
    (0..n).map(|i| Complex64::new(v[i], v[n + i])).collect()
}

/// Maps a stacked `[Re; Im]` real vector back to complex symbols.
pub fn complex_from_real(v: &[f64]) -> Vec<Complex64> {
    unstack(v)
}

pub fn real_expand(c: &ComplexMimoInstance) -> RealMimoInstance {
    let (nr, nt) = (c.nr(), c.nt());
    let h = Matrix::from_fn(2 * nr, 2 * nt, |i, j| {
        let z = c.channel.get(i % nr, j % nt);
        match (i < nr, j < nt) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    RealMimoInstance {
        h,
        y: stack(&c.received),
        x: c.transmitted.as_deref().map(stack),
        constellation: c.constellation,
        noise_var: c.noise_var,
    }
}

/// Inverse of [`real_expand`]; reads the channel from the left block column.
pub fn real_collapse(r: &RealMimoInstance) -> ComplexMimoInstance {
    let nr = r.h.rows() / 2;
    let nt = r.h.cols() / 2;
    let data = (0..nr)
        .flat_map(|i| (0..nt).map(move |j| (i, j)))
        .map(|(i, j)| Complex64::new(r.h[(i, j)], r.h[(nr + i, j)]))
        .collect();
    ComplexMimoInstance {
        channel: ComplexMatrix {
            rows: nr,
            cols: nt,
            data,
        },
        transmitted: r.x.as_deref().map(unstack),
        received: unstack(&r.y),
        noise_var: r.noise_var,
        constellation: r.constellation,
    }
}

/// Noise variance per complex dimension for a given SNR in dB, with
/// `SNR = E‖H̃x̃‖² / E‖n‖² = Nt·E_s / σ²` under unit-variance channel taps.
/// `+∞` dB gives a noiseless instance.
pub fn noise_variance_for_snr(nt: usize, constellation: &QamConstellation, snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        return 0.0;
    }
    nt as f64 * constellation.symbol_energy() / 10f64.powf(snr_db / 10.0)
}

/// i.i.d. `CN(0, 1)` channel matrix.
pub fn rayleigh_channel<R: Rng>(rng: &mut R, nr: usize, nt: usize) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut g = normal_iter(rng, 0.0, s);
    let data = (0..nr * nt)
        .map(|_| {
            let re = g.next().unwrap();
            let im = g.next().unwrap();
            Complex64::new(re, im)
        })
        .collect();
    ComplexMatrix {
        rows: nr,
        cols: nt,
        data,
    }
}

/// Draws uniform symbols and noise for a given channel.
pub fn instance_from_channel(
    stream: RngStream,
    channel: ComplexMatrix,
    constellation: QamConstellation,
    snr_db: f64,
) -> Result<ComplexMimoInstance> {
    let mut rng = stream.rng();
    fill_instance(&mut rng, channel, constellation, snr_db)
}

fn fill_instance<R: Rng>(
    rng: &mut R,
    channel: ComplexMatrix,
    constellation: QamConstellation,
    snr_db: f64,
) -> Result<ComplexMimoInstance> {
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(Error::InvalidParameter(format!("snr {snr_db} dB")));
    }
    let (nr, nt) = (channel.rows(), channel.cols());
    let side = constellation.side();
    let x: Vec<Complex64> = (0..nt)
        .map(|_| {
            let re = constellation.level(rng.random_range(0..side));
            let im = constellation.level(rng.random_range(0..side));
            Complex64::new(re, im)
        })
        .collect();
    let noise_var = noise_variance_for_snr(nt, &constellation, snr_db);
    let hx = channel.matvec(&x);
    let y = if noise_var == 0.0 {
        hx
    } else {
        let mut g = normal_iter(rng, 0.0, (noise_var / 2.0).sqrt());
        hx.into_iter()
            .map(|v| {
                let re = g.next().unwrap();
                let im = g.next().unwrap();
                v + Complex64::new(re, im)
            })
            .collect()
    };
    debug_assert_eq!(y.len(), nr);
    ComplexMimoInstance::new(channel, Some(x), y, noise_var, constellation)
}

/// A Rayleigh-fading instance: channel, then symbols, then noise, all drawn
/// from `stream`.
pub fn rayleigh_instance(
    stream: RngStream,
    nt: usize,
    nr: usize,
    constellation: QamConstellation,
    snr_db: f64,
) -> Result<ComplexMimoInstance> {
    let mut rng = stream.rng();
    let channel = rayleigh_channel(&mut rng, nr, nt);
    fill_instance(&mut rng, channel, constellation, snr_db)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scalar(h: Complex64) -> ComplexMimoInstance {
        let ch = ComplexMatrix::from_vec(1, 1, vec![h]).unwrap();
        ComplexMimoInstance::new(
            ch,
            None,
            vec![c(0.0, 0.0)],
            0.0,
            QamConstellation::new(4).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn expand_real_and_imaginary_scalars() {
        let r = real_expand(&scalar(c(1.0, 0.0)));
        assert_eq!(r.h, Matrix::identity(2));
        let r = real_expand(&scalar(c(0.0, 1.0)));
        assert_eq!(r.h, Matrix::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]).unwrap());
    }

    #[test]
    fn collapse_inverts_expand() {
        let q = QamConstellation::new(16).unwrap();
        let inst = rayleigh_instance(RngStream::new(5, 0), 3, 4, q, 10.0).unwrap();
        assert_eq!(real_collapse(&real_expand(&inst)), inst);
    }

    #[test]
    fn noiseless_instance_is_exact() {
        let q = QamConstellation::new(16).unwrap();
        let inst = rayleigh_instance(RngStream::new(1, 1), 2, 3, q, f64::INFINITY).unwrap();
        assert_eq!(inst.noise_var, 0.0);
        let hx = inst.channel.matvec(inst.transmitted.as_ref().unwrap());
        assert_eq!(inst.received, hx);
    }

    #[test]
    fn replay_is_identical() {
        let q = QamConstellation::new(64).unwrap();
        let a = rayleigh_instance(RngStream::new(3, 9), 4, 4, q, 12.0).unwrap();
        let b = rayleigh_instance(RngStream::new(3, 9), 4, 4, q, 12.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn objective_zero_at_truth_of_noiseless() {
        let q = QamConstellation::new(4).unwrap();
        let inst = real_expand(&rayleigh_instance(RngStream::new(2, 2), 2, 2, q, f64::INFINITY).unwrap());
        let x = inst.x.clone().unwrap();
        assert!(ml_objective(&inst, &x).unwrap() < 1e-24);
        assert!(ml_objective(&inst, &x[1..]).is_err());
    }

    #[test]
    fn zero_instance_has_zero_objective() {
        let q = QamConstellation::new(4).unwrap();
        let inst = RealMimoInstance::new(Matrix::identity(2), vec![0.0; 2], None, q, 0.0).unwrap();
        assert_eq!(ml_objective(&inst, &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn snr_convention() {
        let q = QamConstellation::new(16).unwrap();
        assert!((noise_variance_for_snr(4, &q, 10.0) - 4.0).abs() < 1e-12);
        assert_eq!(noise_variance_for_snr(4, &q, f64::INFINITY), 0.0);
    }

    #[test]
    fn rejects_more_users_than_antennas() {
        let ch = ComplexMatrix::from_vec(1, 2, vec![c(1.0, 0.0); 2]).unwrap();
        let q = QamConstellation::new(4).unwrap();
        assert!(ComplexMimoInstance::new(ch, None, vec![c(0.0, 0.0)], 0.0, q).is_err());
    }
}
