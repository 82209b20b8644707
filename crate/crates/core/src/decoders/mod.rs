//! Multiuser detectors for the superimposed sparse-code uplink.
//!
//! Three detectors share one interface: exhaustive maximum likelihood
//! ([`ml_decode`]), iterative message passing on the factor graph
//! ([`mpa_decode`]), and the two-stage low-complexity detector
//! ([`lc_decode`]). All of them operate on a [`ReceivedVector`] plus a
//! [`ChannelGains`] matrix, so the surface-assisted and the direct baseline
//! channel plug in interchangeably.

mod lc;
mod ml;
mod mpa;

pub use lc::{lc_decode, lc_stage1, lc_stage2, OreStep, Stage1Result};
pub use ml::{ml_combination_count, ml_decode, ML_COMBINATION_BUDGET};
pub use mpa::{mpa_decode, MessageTable, MpaState};

use num_complex::Complex64;
use thiserror::Error;

use crate::channel::ChannelGains;
use crate::codebook::Codebook;

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("exhaustive search over {combinations} codeword combinations exceeds the budget of {budget}")]
    BudgetExceeded { combinations: u128, budget: u128 },
}

/// The noisy per-resource samples observed in one codeword interval,
/// together with the total complex noise variance per resource element.
#[derive(Debug, Clone)]
pub struct ReceivedVector {
    pub y: Vec<Complex64>,
    pub noise_var: f64,
}

impl ReceivedVector {
    pub fn new(y: Vec<Complex64>, noise_var: f64) -> Self {
        Self { y, noise_var }
    }
}

/// Hard decisions: one codeword index per user, optionally with the final
/// per-user score vectors that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub indices: Vec<usize>,
    pub per_user_scores: Option<Vec<Vec<f64>>>,
}

/// Gaussian likelihood of one resource sample given a candidate superposition,
/// up to the constant prefactor (which cancels under message normalization):
/// `exp(-|y - candidate|^2 / noise_var)` with `noise_var` the total complex
/// noise variance.
pub fn likelihood(y: Complex64, candidate_sum: Complex64, noise_var: f64) -> f64 {
    assert!(noise_var > 0.0);
    (-(y - candidate_sum).norm_sqr() / noise_var).exp()
}

/// Noiseless superposition of all users' codewords through the channel,
/// `y_r = sum_{u on r} H[u][r] * c_{u,m_u}^r`.
pub fn superimposed_signal(
    gains: &ChannelGains,
    codebook: &Codebook,
    indices: &[usize],
) -> Vec<Complex64> {
    let graph = codebook.graph();
    (0..graph.resources())
        .map(|r| {
            graph
                .users_on_resource(r)
                .iter()
                .map(|&u| gains.get(u, r) * codebook.entry(u, indices[u], r))
                .sum()
        })
        .collect()
}

/// Total squared residual `||y - sum_u H_u c_u||^2` for a candidate set of
/// codeword indices.
pub fn total_residual(
    y: &[Complex64],
    gains: &ChannelGains,
    codebook: &Codebook,
    indices: &[usize],
) -> f64 {
    let synth = superimposed_signal(gains, codebook, indices);
    y.iter()
        .zip(synth.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum()
}

/// Index of the largest entry; ties resolve to the lowest index.
pub fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Index of the smallest entry; ties resolve to the lowest index.
pub fn argmin_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best
}
