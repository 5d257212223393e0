//! Experiment runner for multi-stage delta-Ising MIMO detection: BER sweeps,
//! coupled plots, radius-heuristic reports and channel-trace conversion.

pub mod config;
pub mod coupled;
pub mod error;
pub mod experiment;
pub mod output;
pub mod radius_report;
pub mod sweep;
pub mod trace_convert;

pub use config::{Detector, ExperimentConfig};
pub use error::{BenchError, Result};

/// Runs `f` on a dedicated pool of `workers` threads (0 = rayon default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| BenchError::Runtime(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}
