//! MIMO system model: QAM constellations, complex and real-expanded channel
//! instances, the ML objective with its exhaustive oracle, Gray-coded bit
//! error counting and the channel-trace file format.

mod bits;
mod constellation;
mod instance;
mod oracle;
mod trace;

pub use bits::bit_error_count;
pub use constellation::QamConstellation;
pub use instance::{
    complex_from_real, instance_from_channel, ml_objective, noise_variance_for_snr, rayleigh_channel,
    rayleigh_instance, real_collapse, real_expand, ComplexMatrix, ComplexMimoInstance,
    RealMimoInstance,
};
pub use oracle::{ml_oracle, search_space_size, ORACLE_LIMIT};
pub use trace::{read_trace, write_trace, ChannelTrace, TraceHeader};
