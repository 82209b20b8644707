//! Link-level simulation of uplink sparse code multiple access through a
//! reconfigurable intelligent surface.
//!
//! The crate is organized around the per-frame pipeline:
//!
//! - [`codebook`]: sparse codebooks, the factor graph and the bit mapping;
//! - [`channel`]: Rayleigh link realizations, surface phase control and the
//!   effective per-user gains (plus the direct-channel baseline);
//! - [`decoders`]: exhaustive ML, iterative message passing and the
//!   two-stage low-complexity detector;
//! - [`complexity`]: closed-form real-addition/multiplication cost models
//!   for the three decoding schemes;
//! - [`sim`]: the deterministic Monte-Carlo BER engine and curve analysis.

pub mod channel;
pub mod codebook;
pub mod complexity;
pub mod decoders;
pub mod sim;

pub use channel::{
    draw_channels, draw_direct_channels, effective_channel, optimize_phases, ChannelGains,
    ChannelRealization, DirectChannel, EffectiveChannel, PhaseConfiguration, PhaseMode,
};
pub use codebook::{
    bits_to_indices, indices_to_bits, BitMapping, Codebook, CodebookError, FactorGraph,
};
pub use decoders::{
    lc_decode, lc_stage1, lc_stage2, likelihood, ml_decode, mpa_decode, DecodeError, Decision,
    ReceivedVector,
};
pub use sim::{
    gain_at_ber, run_frame, run_sweep, BerRecord, DecoderKind, Scheme, SimConfig, SimError,
};
