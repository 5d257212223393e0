use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Descriptor of a reproducible random stream.
///
/// The same `(master_seed, stream_id)` pair always yields the same sample
/// sequence, regardless of which thread draws it. Streams are derived
/// hierarchically with [`RngStream::child`] so that parallel work items can
/// each own an independent stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub const fn new(master_seed: u64, stream_id: u64) -> Self {
        RngStream {
            master_seed,
            stream_id,
        }
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Sub-stream `index` of this stream.
    pub fn child(&self, index: u64) -> RngStream {
        RngStream {
            master_seed: self.master_seed,
            stream_id: splitmix64(self.stream_id ^ splitmix64(index.wrapping_add(0x5851_f42d_4c95_7f2d))),
        }
    }

    /// Follows a path of child indices, e.g. `(instance, stage, track)`.
    pub fn derive(&self, path: &[u64]) -> RngStream {
        path.iter().fold(*self, |s, &i| s.child(i))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `n` i.i.d. normal samples drawn from the start of `stream`.
pub fn sample_normal(stream: RngStream, n: usize, mean: f64, std: f64) -> Vec<f64> {
    let mut rng = stream.rng();
    normal_iter(&mut rng, mean, std).take(n).collect()
}

/// `n` i.i.d. samples of `|N(0, std²)|`.
pub fn sample_folded_normal(stream: RngStream, n: usize, std: f64) -> Vec<f64> {
    let mut rng = stream.rng();
    normal_iter(&mut rng, 0.0, std).take(n).map(f64::abs).collect()
}

pub(crate) fn normal_iter<R: rand::Rng>(
    rng: &mut R,
    mean: f64,
    std: f64,
) -> impl Iterator<Item = f64> + '_ {
    assert!(std >= 0.0 && std.is_finite(), "standard deviation must be finite and >= 0");
    let dist = Normal::new(mean, std).expect("valid normal parameters");
    std::iter::repeat_with(move || dist.sample(rng))
}
