//! Exhaustive maximum-likelihood detection.

use super::{DecodeError, Decision, ReceivedVector};
use crate::channel::ChannelGains;
use crate::codebook::Codebook;

/// Hard cap on the number of codeword combinations the exhaustive search
/// will enumerate.
pub const ML_COMBINATION_BUDGET: u128 = 10_000_000;

/// Number of codeword combinations, `M^U`.
pub fn ml_combination_count(m: usize, users: usize) -> u128 {
    (m as u128).pow(users as u32)
}

/// Joint detection by exhaustive search: returns the index combination
/// minimizing `||y - sum_u H_u c_u||^2`.
///
/// Combinations are enumerated with user 0 as the most significant digit;
/// ties resolve to the lowest combination index.
pub fn ml_decode(
    y: &ReceivedVector,
    gains: &ChannelGains,
    codebook: &Codebook,
) -> Result<Decision, DecodeError> {
    let graph = codebook.graph();
    let users = graph.users();
    let m = codebook.m();
    let combinations = ml_combination_count(m, users);
    if combinations > ML_COMBINATION_BUDGET {
        return Err(DecodeError::BudgetExceeded {
            combinations,
            budget: ML_COMBINATION_BUDGET,
        });
    }

    let mut indices = vec![0usize; users];
    let mut best_indices = vec![0usize; users];
    let mut best_cost = f64::INFINITY;
    for j in 0..combinations as u64 {
        let mut rem = j;
        for u in (0..users).rev() {
            indices[u] = (rem % m as u64) as usize;
            rem /= m as u64;
        }
        let mut cost = 0.0;
        for r in 0..graph.resources() {
            let mut sum = num_complex::Complex64::ZERO;
            for &u in graph.users_on_resource(r) {
                sum += gains.get(u, r) * codebook.entry(u, indices[u], r);
            }
            cost += (y.y[r] - sum).norm_sqr();
        }
        if cost < best_cost {
            best_cost = cost;
            best_indices.copy_from_slice(&indices);
        }
    }
    Ok(Decision {
        indices: best_indices,
        per_user_scores: None,
    })
}
