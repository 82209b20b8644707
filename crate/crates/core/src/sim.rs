//! Monte-Carlo bit-error-rate engine.
//!
//! A frame is one codeword interval: draw bits, map them to codewords, draw
//! an independent block-fading realization, configure the surface phases,
//! superimpose through the channel, add noise, decode with perfect channel
//! knowledge and count bit errors.
//!
//! Reproducibility contract: every frame gets its own random stream derived
//! from `(master_seed, frame_index)` alone, with a fixed draw order (bits,
//! then channel links, then noise). Sweeps execute frames in fixed-size
//! batches and apply the stopping rule only at batch boundaries, so results
//! are byte-identical for any worker count.
//!
//! The SNR axis is Eb/N0 per user: with unit codeword energy the per-resource
//! complex noise variance is `N0 = 10^(-snr/10) / log2(M)`.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{
    draw_channels, draw_direct_channels, effective_channel, optimize_phases, ChannelGains,
    PhaseMode,
};
use crate::codebook::{bits_to_indices, indices_to_bits, Codebook, CodebookError, FactorGraph};
use crate::decoders::{lc_decode, ml_decode, mpa_decode, superimposed_signal, DecodeError,
    ReceivedVector};

/// Overloaded layout used throughout: 6 users on 4 resource elements, each
/// user occupying 2 of them, each element shared by 3 users.
pub const STANDARD_RESOURCES: usize = 4;
pub const STANDARD_USERS: usize = 6;
pub const STANDARD_DV: usize = 2;
pub const STANDARD_DF: usize = 3;

/// Frames per scheduling batch. The stopping rule is evaluated at batch
/// boundaries only, which keeps sweep output independent of the worker count.
pub const FRAME_BATCH: u64 = 512;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Codebook(#[from] CodebookError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("target BER {target} is not bracketed by the curve")]
    NotBracketed { target: f64 },
}

/// Which channel the frame runs through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "scma")]
    Scma,
    #[serde(rename = "scma-ris")]
    ScmaRis,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Scma => "scma",
            Scheme::ScmaRis => "scma-ris",
        }
    }
}

/// Which detector decodes the frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderKind {
    Ml,
    Mpa,
    Lc,
}

impl DecoderKind {
    pub fn name(&self) -> &'static str {
        match self {
            DecoderKind::Ml => "ml",
            DecoderKind::Mpa => "mpa",
            DecoderKind::Lc => "lc",
        }
    }
}

/// Full description of one Monte-Carlo sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub scheme: Scheme,
    pub decoder: DecoderKind,
    pub phase_mode: PhaseMode,
    #[serde(rename = "M")]
    pub m: usize,
    /// Reflecting elements (ignored by the `scma` baseline).
    #[serde(rename = "N")]
    pub n: usize,
    /// Message-passing iterations (ignored by `ml` and `lc`).
    #[serde(rename = "K")]
    pub k: usize,
    /// Stage-2 passes of the `lc` decoder.
    #[serde(default = "default_sweeps")]
    pub sweeps: usize,
    pub snr_grid_db: Vec<f64>,
    pub max_frames: u64,
    /// Early-stop threshold per SNR point; 0 disables early stopping.
    #[serde(default)]
    pub min_bit_errors: u64,
    pub master_seed: u64,
}

fn default_sweeps() -> usize {
    1
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.snr_grid_db.is_empty() {
            return Err(SimError::InvalidConfig("snr_grid_db is empty".into()));
        }
        if self.max_frames == 0 {
            return Err(SimError::InvalidConfig("max_frames must be >= 1".into()));
        }
        if !self.m.is_power_of_two() || self.m < 2 {
            return Err(SimError::InvalidConfig(format!(
                "M must be a power of two >= 2, got {}",
                self.m
            )));
        }
        if self.n == 0 {
            return Err(SimError::InvalidConfig("N must be >= 1".into()));
        }
        if self.k == 0 {
            return Err(SimError::InvalidConfig("K must be >= 1".into()));
        }
        Ok(())
    }
}

/// One measured point of a BER curve.
#[derive(Debug, Clone, Serialize)]
pub struct BerRecord {
    pub scheme: Scheme,
    pub decoder: DecoderKind,
    pub phase_mode: PhaseMode,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub snr_db: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub seed: u64,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl BerRecord {
    pub const CSV_HEADER: &'static str =
        "scheme,decoder,phase_mode,M,N,K,snr_db,frames,bit_errors,ber,seed";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.scheme.name(),
            self.decoder.name(),
            self.phase_mode.name(),
            self.m,
            self.n,
            self.k,
            self.snr_db,
            self.frames,
            self.bit_errors,
            self.ber,
            self.seed
        )
    }
}

/// Renders a slice of records as the canonical CSV document.
pub fn records_to_csv(records: &[BerRecord]) -> String {
    let mut out = String::from(BerRecord::CSV_HEADER);
    out.push('\n');
    for record in records {
        out.push_str(&record.csv_row());
        out.push('\n');
    }
    out
}

/// The graph and codebook for the standard layout.
pub fn standard_setup(m: usize) -> Result<(FactorGraph, Codebook), CodebookError> {
    let graph = FactorGraph::standard(
        STANDARD_RESOURCES,
        STANDARD_USERS,
        STANDARD_DV,
        STANDARD_DF,
    )?;
    let codebook = Codebook::default_for(&graph, m)?;
    Ok((graph, codebook))
}

/// Deterministic per-frame random stream. Independent of worker count and of
/// the SNR point, so fixed-frame comparisons across configurations see the
/// same bits, fading and noise directions.
pub fn frame_rng(master_seed: u64, frame: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[0..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&frame.to_le_bytes());
    seed[16..24].copy_from_slice(&0x6672616d655f7631u64.to_le_bytes()); // stream tag
    ChaCha8Rng::from_seed(seed)
}

/// Per-resource total complex noise variance for an Eb/N0 grid point, given
/// unit codeword energy per user.
pub fn noise_variance(snr_db: f64, bits_per_codeword: usize) -> f64 {
    10f64.powf(-snr_db / 10.0) / bits_per_codeword as f64
}

/// Draws one frame's additive noise: circularly symmetric complex samples
/// with total variance `noise_var` per resource element.
pub fn draw_noise<R: Rng>(rng: &mut R, resources: usize, noise_var: f64) -> Vec<Complex64> {
    let dist = Normal::new(0.0, (noise_var / 2.0).sqrt()).unwrap();
    (0..resources)
        .map(|_| Complex64::new(dist.sample(rng), dist.sample(rng)))
        .collect()
}

/// Runs one frame end to end and returns its bit-error count.
pub fn run_frame(
    config: &SimConfig,
    codebook: &Codebook,
    snr_db: f64,
    frame: u64,
) -> Result<u32, SimError> {
    let graph = codebook.graph();
    let mapping = codebook.bit_mapping()?;
    let mut rng = frame_rng(config.master_seed, frame);

    let n_bits = graph.users() * mapping.bits_per_codeword();
    let bits: Vec<u8> = (0..n_bits).map(|_| rng.random_range(0..2u8)).collect();
    let indices = bits_to_indices(&bits, codebook)?;

    let gains: ChannelGains = match config.scheme {
        Scheme::Scma => draw_direct_channels(graph.users(), graph.resources(), &mut rng)
            .into_gains(),
        Scheme::ScmaRis => {
            let realization =
                draw_channels(graph.users(), graph.resources(), config.n, &mut rng);
            let phases = optimize_phases(&realization, graph, config.phase_mode);
            effective_channel(&realization, &phases).into_gains()
        }
    };

    let noise_var = noise_variance(snr_db, mapping.bits_per_codeword());
    let mut y = superimposed_signal(&gains, codebook, &indices);
    for (s, w) in y.iter_mut().zip(draw_noise(&mut rng, graph.resources(), noise_var)) {
        *s += w;
    }
    let received = ReceivedVector::new(y, noise_var);

    let decision = match config.decoder {
        DecoderKind::Ml => ml_decode(&received, &gains, codebook)?,
        DecoderKind::Mpa => mpa_decode(&received, &gains, codebook, config.k),
        DecoderKind::Lc => lc_decode(&received, &gains, codebook, config.sweeps),
    };

    let decoded_bits = indices_to_bits(&decision.indices, codebook)?;
    Ok(bits
        .iter()
        .zip(decoded_bits.iter())
        .filter(|(a, b)| a != b)
        .count() as u32)
}

/// Runs the configured SNR sweep. Within each point, frames run in
/// `FRAME_BATCH`-sized batches (parallel within a batch); the point stops at
/// the first batch boundary where `min_bit_errors` is reached, or at
/// `max_frames`.
pub fn run_sweep(config: &SimConfig) -> Result<Vec<BerRecord>, SimError> {
    config.validate()?;
    let (_, codebook) = standard_setup(config.m)?;
    let bits_per_frame =
        (codebook.graph().users() * codebook.bit_mapping()?.bits_per_codeword()) as u64;

    let mut records = Vec::with_capacity(config.snr_grid_db.len());
    for &snr_db in &config.snr_grid_db {
        let started = Instant::now();
        let mut frames = 0u64;
        let mut bit_errors = 0u64;
        while frames < config.max_frames {
            let batch = FRAME_BATCH.min(config.max_frames - frames);
            let batch_errors: u64 = (frames..frames + batch)
                .into_par_iter()
                .map(|f| run_frame(config, &codebook, snr_db, f).map(u64::from))
                .try_reduce(|| 0, |a, b| Ok(a + b))?;
            bit_errors += batch_errors;
            frames += batch;
            if config.min_bit_errors > 0 && bit_errors >= config.min_bit_errors {
                break;
            }
        }
        records.push(BerRecord {
            scheme: config.scheme,
            decoder: config.decoder,
            phase_mode: config.phase_mode,
            m: config.m,
            n: config.n,
            k: config.k,
            snr_db,
            frames,
            bit_errors,
            ber: bit_errors as f64 / (frames * bits_per_frame) as f64,
            seed: config.master_seed,
            wall_time: started.elapsed(),
        });
    }
    Ok(records)
}

// ---------------------------------------------------------------------------
// Curve analysis
// ---------------------------------------------------------------------------

/// `(snr_db, ber)` view of a record slice, for curve interpolation.
pub fn curve_points(records: &[BerRecord]) -> Vec<(f64, f64)> {
    records.iter().map(|r| (r.snr_db, r.ber)).collect()
}

/// SNR at which a curve crosses `target` BER, by log-linear interpolation
/// between the first bracketing pair of points.
pub fn snr_at_ber(curve: &[(f64, f64)], target: f64) -> Result<f64, SimError> {
    assert!(target > 0.0);
    let mut points: Vec<(f64, f64)> = curve.to_vec();
    points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    for pair in points.windows(2) {
        let (s0, b0) = pair[0];
        let (s1, b1) = pair[1];
        if b0 <= 0.0 || b1 <= 0.0 {
            continue;
        }
        if b0 == target {
            return Ok(s0);
        }
        if b1 == target {
            return Ok(s1);
        }
        if (b0 - target) * (b1 - target) < 0.0 {
            let t = (target.ln() - b0.ln()) / (b1.ln() - b0.ln());
            return Ok(s0 + t * (s1 - s0));
        }
    }
    Err(SimError::NotBracketed { target })
}

/// SNR gap between two curves at a target BER: `snr_b - snr_a`, positive when
/// curve `a` reaches the target at lower SNR (curve `a` is the better one).
pub fn gain_at_ber(
    curve_a: &[(f64, f64)],
    curve_b: &[(f64, f64)],
    target: f64,
) -> Result<f64, SimError> {
    Ok(snr_at_ber(curve_b, target)? - snr_at_ber(curve_a, target)?)
}
