//! Two-stage low-complexity detection.
//!
//! Stage 1 sweeps the resource elements in index order. At each element it
//! cancels the users already detected, jointly detects the remaining sharing
//! users by enumerating their `M^U'` local combinations against that single
//! sample, and stops early once every user is detected. Stage 2 refines the
//! result by coordinate descent: one user at a time is re-detected over its
//! `d_v` occupied elements with all other users' current estimates cancelled,
//! and updates take effect immediately within the sweep.

use num_complex::Complex64;

use super::{argmin_lowest, Decision, ReceivedVector};
use crate::channel::ChannelGains;
use crate::codebook::Codebook;

/// One stage-1 detection step: which resource element was solved, which
/// users it detected, and how many combinations that took.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OreStep {
    pub resource: usize,
    pub detected_users: Vec<usize>,
    pub enumerated: usize,
}

/// Stage-1 output: initial per-user decisions plus the sweep bookkeeping.
#[derive(Debug, Clone)]
pub struct Stage1Result {
    pub decision: Decision,
    pub schedule: Vec<OreStep>,
    pub total_enumerated: usize,
}

/// Sequential per-resource joint detection (stage 1).
pub fn lc_stage1(y: &ReceivedVector, gains: &ChannelGains, codebook: &Codebook) -> Stage1Result {
    let graph = codebook.graph();
    let m = codebook.m();
    let users = graph.users();

    let mut detected: Vec<Option<usize>> = vec![None; users];
    let mut n_detected = 0usize;
    let mut schedule = Vec::new();
    let mut total_enumerated = 0usize;

    for r in 0..graph.resources() {
        if n_detected == users {
            break;
        }
        let sharing = graph.users_on_resource(r);
        let pending: Vec<usize> = sharing
            .iter()
            .copied()
            .filter(|&u| detected[u].is_none())
            .collect();
        if pending.is_empty() {
            continue;
        }

        // Cancel the contribution of the users already detected on this
        // element.
        let mut residual = y.y[r];
        for &u in sharing {
            if let Some(cw) = detected[u] {
                residual -= gains.get(u, r) * codebook.entry(u, cw, r);
            }
        }

        let contrib: Vec<Vec<Complex64>> = pending
            .iter()
            .map(|&u| (0..m).map(|cw| gains.get(u, r) * codebook.entry(u, cw, r)).collect())
            .collect();
        let combos = m.pow(pending.len() as u32);
        let mut best_j = 0usize;
        let mut best_cost = f64::INFINITY;
        for j in 0..combos {
            let mut sum = Complex64::ZERO;
            let mut rem = j;
            for c in &contrib {
                sum += c[rem % m];
                rem /= m;
            }
            let cost = (residual - sum).norm_sqr();
            if cost < best_cost {
                best_cost = cost;
                best_j = j;
            }
        }

        let mut rem = best_j;
        for &u in &pending {
            detected[u] = Some(rem % m);
            rem /= m;
        }
        n_detected += pending.len();
        total_enumerated += combos;
        schedule.push(OreStep {
            resource: r,
            detected_users: pending,
            enumerated: combos,
        });
    }

    let indices: Vec<usize> = detected
        .into_iter()
        .map(|d| d.expect("every user occupies at least one resource element"))
        .collect();
    Stage1Result {
        decision: Decision {
            indices,
            per_user_scores: None,
        },
        schedule,
        total_enumerated,
    }
}

/// Coordinate-descent refinement (stage 2): `sweeps` passes over the users
/// in index order, re-detecting each one over its occupied elements while
/// holding the others at their current estimates.
pub fn lc_stage2(
    y: &ReceivedVector,
    gains: &ChannelGains,
    codebook: &Codebook,
    initial: &Decision,
    sweeps: usize,
) -> Decision {
    let graph = codebook.graph();
    let m = codebook.m();
    let users = graph.users();
    assert_eq!(initial.indices.len(), users, "initial decision must cover all users");

    let mut indices = initial.indices.clone();
    let mut costs = vec![0.0f64; m];
    for _ in 0..sweeps {
        for u in 0..users {
            costs.fill(0.0);
            for &r in graph.resources_of_user(u) {
                let mut residual = y.y[r];
                for &other in graph.users_on_resource(r) {
                    if other != u {
                        residual -= gains.get(other, r) * codebook.entry(other, indices[other], r);
                    }
                }
                for (cw, cost) in costs.iter_mut().enumerate() {
                    *cost += (residual - gains.get(u, r) * codebook.entry(u, cw, r)).norm_sqr();
                }
            }
            indices[u] = argmin_lowest(&costs);
        }
    }
    Decision {
        indices,
        per_user_scores: None,
    }
}

/// Full two-stage detection: stage 1 followed by `sweeps` stage-2 passes.
pub fn lc_decode(
    y: &ReceivedVector,
    gains: &ChannelGains,
    codebook: &Codebook,
    sweeps: usize,
) -> Decision {
    let stage1 = lc_stage1(y, gains, codebook);
    lc_stage2(y, gains, codebook, &stage1.decision, sweeps)
}
