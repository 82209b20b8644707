//! Iterative message-passing detection on the factor graph.
//!
//! Function nodes are resource elements, variable nodes are users. Messages
//! are length-M probability vectors over each user's codewords. Variable
//! messages start uniform; each iteration runs a function-node update
//! (marginalizing the channel likelihood over the `M^(d_f - 1)` interfering
//! combinations) followed by a variable-node update with normalization to
//! unit sum. After `K` iterations each user decides by the product of its
//! incoming function messages.
//!
//! The channel likelihood table and every function message are rescaled by
//! their maximum before use. The rescaling is a positive per-vector constant,
//! so decisions are unchanged while exponent underflow at high SNR is
//! avoided.

use super::{argmax_lowest, Decision, ReceivedVector};
use crate::channel::ChannelGains;
use crate::codebook::Codebook;

/// Directed message storage, one length-M vector per factor-graph edge.
#[derive(Debug, Clone)]
pub struct MessageTable {
    /// Function-node to variable-node messages, indexed by edge id.
    pub fn_to_vn: Vec<Vec<f64>>,
    /// Variable-node to function-node messages, indexed by edge id.
    pub vn_to_fn: Vec<Vec<f64>>,
}

/// Decoder state: edge layout, the per-resource likelihood tables and the
/// current messages. Step with [`MpaState::iterate`], read out with
/// [`MpaState::decide`].
pub struct MpaState<'a> {
    codebook: &'a Codebook,
    m: usize,
    /// Edge id -> (resource, user), grouped by resource.
    edges: Vec<(usize, usize)>,
    /// Per resource: (first edge id, edge count).
    per_resource: Vec<(usize, usize)>,
    /// Per user: edge ids of its occupied resources.
    per_user: Vec<Vec<usize>>,
    /// Per resource: rescaled likelihood of each of the `M^d_f` local
    /// codeword combinations (position-major digits).
    likelihood: Vec<Vec<f64>>,
    pub messages: MessageTable,
}

impl<'a> MpaState<'a> {
    pub fn new(y: &ReceivedVector, gains: &ChannelGains, codebook: &'a Codebook) -> Self {
        let graph = codebook.graph();
        let m = codebook.m();

        let mut edges = Vec::new();
        let mut per_resource = Vec::with_capacity(graph.resources());
        let mut per_user = vec![Vec::new(); graph.users()];
        for r in 0..graph.resources() {
            let start = edges.len();
            for &u in graph.users_on_resource(r) {
                per_user[u].push(edges.len());
                edges.push((r, u));
            }
            per_resource.push((start, edges.len() - start));
        }

        // Likelihoods of all local combinations, computed once per frame;
        // rescaled so the largest entry is 1.
        let mut likelihood = Vec::with_capacity(graph.resources());
        for r in 0..graph.resources() {
            let users = graph.users_on_resource(r);
            let df = users.len();
            let combos = m.pow(df as u32);
            let contrib: Vec<Vec<num_complex::Complex64>> = users
                .iter()
                .map(|&u| (0..m).map(|cw| gains.get(u, r) * codebook.entry(u, cw, r)).collect())
                .collect();
            let mut log_like = Vec::with_capacity(combos);
            let mut max_ll = f64::NEG_INFINITY;
            for j in 0..combos {
                let mut sum = num_complex::Complex64::ZERO;
                let mut rem = j;
                for c in contrib.iter() {
                    sum += c[rem % m];
                    rem /= m;
                }
                let ll = -(y.y[r] - sum).norm_sqr() / y.noise_var;
                max_ll = max_ll.max(ll);
                log_like.push(ll);
            }
            likelihood.push(log_like.into_iter().map(|ll| (ll - max_ll).exp()).collect());
        }

        let uniform = vec![1.0 / m as f64; m];
        let messages = MessageTable {
            fn_to_vn: vec![vec![0.0; m]; edges.len()],
            vn_to_fn: vec![uniform; edges.len()],
        };

        Self {
            codebook,
            m,
            edges,
            per_resource,
            per_user,
            likelihood,
            messages,
        }
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// One full iteration: function-node update, then variable-node update.
    pub fn iterate(&mut self) {
        self.update_fn_to_vn();
        self.update_vn_to_fn();
    }

    fn update_fn_to_vn(&mut self) {
        let m = self.m;
        for &(start, df) in &self.per_resource {
            let r = self.edges[start].0;
            let like = &self.likelihood[r];
            for p in 0..df {
                let edge = start + p;
                let mut out = vec![0.0f64; m];
                for (j, &lw) in like.iter().enumerate() {
                    let mut w = lw;
                    let mut rem = j;
                    let mut own_digit = 0;
                    for q in 0..df {
                        let digit = rem % m;
                        rem /= m;
                        if q == p {
                            own_digit = digit;
                        } else {
                            w *= self.messages.vn_to_fn[start + q][digit];
                        }
                    }
                    out[own_digit] += w;
                }
                rescale_by_max(&mut out);
                self.messages.fn_to_vn[edge] = out;
            }
        }
    }

    fn update_vn_to_fn(&mut self) {
        let m = self.m;
        for edges in &self.per_user {
            for &e in edges {
                let mut out = vec![1.0f64; m];
                for &other in edges {
                    if other != e {
                        for (o, f) in out.iter_mut().zip(&self.messages.fn_to_vn[other]) {
                            *o *= f;
                        }
                    }
                }
                rescale_by_max(&mut out);
                let sum: f64 = out.iter().sum();
                if sum > 0.0 {
                    for o in &mut out {
                        *o /= sum;
                    }
                } else {
                    out.fill(1.0 / m as f64);
                }
                self.messages.vn_to_fn[e] = out;
            }
        }
    }

    /// Per-user decision: argmax over the product of incoming function
    /// messages, ties to the lowest codeword index.
    pub fn decide(&self) -> Decision {
        let users = self.codebook.graph().users();
        let mut indices = Vec::with_capacity(users);
        let mut scores = Vec::with_capacity(users);
        for edges in &self.per_user {
            let mut score = vec![1.0f64; self.m];
            for &e in edges {
                for (s, f) in score.iter_mut().zip(&self.messages.fn_to_vn[e]) {
                    *s *= f;
                }
            }
            indices.push(argmax_lowest(&score));
            let sum: f64 = score.iter().sum();
            if sum > 0.0 {
                for s in &mut score {
                    *s /= sum;
                }
            }
            scores.push(score);
        }
        Decision {
            indices,
            per_user_scores: Some(scores),
        }
    }
}

fn rescale_by_max(values: &mut [f64]) {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max > 0.0 && max.is_finite() {
        for v in values {
            *v /= max;
        }
    }
}

/// Runs `iterations >= 1` message-passing iterations and decides.
pub fn mpa_decode(
    y: &ReceivedVector,
    gains: &ChannelGains,
    codebook: &Codebook,
    iterations: usize,
) -> Decision {
    assert!(iterations >= 1, "message passing needs at least one iteration");
    let mut state = MpaState::new(y, gains, codebook);
    for _ in 0..iterations {
        state.iterate();
    }
    state.decide()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::draw_direct_channels;
    use crate::codebook::FactorGraph;
    use crate::decoders::{ml_decode, superimposed_signal};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn standard(m: usize) -> Codebook {
        let graph = FactorGraph::standard(4, 6, 2, 3).unwrap();
        Codebook::default_for(&graph, m).unwrap()
    }

    #[test]
    fn single_user_matches_ml_after_one_iteration() {
        let graph = FactorGraph::standard(2, 1, 2, 1).unwrap();
        let cb = Codebook::default_for(&graph, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let noise = Normal::new(0.0, 0.3f64).unwrap();
        for _ in 0..50 {
            let ch = draw_direct_channels(1, 2, &mut rng);
            let sent = vec![rng.random_range(0..4)];
            let mut y = superimposed_signal(ch.gains(), &cb, &sent);
            for s in &mut y {
                *s += Complex64::new(noise.sample(&mut rng), noise.sample(&mut rng));
            }
            let rv = ReceivedVector::new(y, 0.18);
            let mpa = mpa_decode(&rv, ch.gains(), &cb, 1);
            let ml = ml_decode(&rv, ch.gains(), &cb).unwrap();
            assert_eq!(mpa.indices, ml.indices);
        }
    }

    #[test]
    fn variable_messages_stay_normalized() {
        let cb = standard(4);
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        let ch = draw_direct_channels(6, 4, &mut rng);
        let sent: Vec<usize> = (0..6).map(|_| rng.random_range(0..4)).collect();
        let mut y = superimposed_signal(ch.gains(), &cb, &sent);
        let noise = Normal::new(0.0, 0.2f64).unwrap();
        for s in &mut y {
            *s += Complex64::new(noise.sample(&mut rng), noise.sample(&mut rng));
        }
        let rv = ReceivedVector::new(y, 0.08);
        let mut state = MpaState::new(&rv, ch.gains(), &cb);
        for _ in 0..6 {
            state.iterate();
            for vec in &state.messages.vn_to_fn {
                let sum: f64 = vec.iter().sum();
                assert!((sum - 1.0).abs() < 1e-9, "message sum {sum}");
                assert!(vec.iter().all(|&p| p >= 0.0));
            }
        }
    }

    #[test]
    fn high_snr_decisions_track_ml() {
        let cb = standard(2);
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let sigma = 0.02f64;
        let noise = Normal::new(0.0, sigma).unwrap();
        let mut agree = 0usize;
        let frames = 1000;
        for _ in 0..frames {
            let ch = draw_direct_channels(6, 4, &mut rng);
            let sent: Vec<usize> = (0..6).map(|_| rng.random_range(0..2)).collect();
            let mut y = superimposed_signal(ch.gains(), &cb, &sent);
            for s in &mut y {
                *s += Complex64::new(noise.sample(&mut rng), noise.sample(&mut rng));
            }
            let rv = ReceivedVector::new(y, 2.0 * sigma * sigma);
            let mpa = mpa_decode(&rv, ch.gains(), &cb, 8);
            let ml = ml_decode(&rv, ch.gains(), &cb).unwrap();
            if mpa.indices == ml.indices {
                agree += 1;
            }
        }
        assert!(
            agree as f64 >= 0.99 * frames as f64,
            "MPA agreed with ML on {agree}/{frames} frames"
        );
    }

    #[test]
    fn decision_is_scale_invariant() {
        let cb = standard(4);
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        for _ in 0..100 {
            let ch = draw_direct_channels(6, 4, &mut rng);
            let sent: Vec<usize> = (0..6).map(|_| rng.random_range(0..4)).collect();
            let mut y = superimposed_signal(ch.gains(), &cb, &sent);
            let noise = Normal::new(0.0, 0.25f64).unwrap();
            for s in &mut y {
                *s += Complex64::new(noise.sample(&mut rng), noise.sample(&mut rng));
            }
            let rv = ReceivedVector::new(y, 0.125);
            let dec = mpa_decode(&rv, ch.gains(), &cb, 4);
            let scores = dec.per_user_scores.as_ref().unwrap();
            for (u, score) in scores.iter().enumerate() {
                let c: f64 = rng.random_range(1e-3..1e3);
                let rescaled: Vec<f64> = score.iter().map(|&s| s * c).collect();
                assert_eq!(argmax_lowest(&rescaled), dec.indices[u]);
            }
        }
    }
}
