//! Cross-checks the decoders against independently written reference
//! implementations. The oracles here deliberately share no code with the
//! library's decode paths: the ML oracle is a naive nested loop over raw
//! index vectors, and the two-stage oracle is a single straight-line
//! function.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use scma_ris::channel::{draw_direct_channels, ChannelGains};
use scma_ris::codebook::{Codebook, FactorGraph};
use scma_ris::decoders::{lc_decode, ml_decode, mpa_decode, ReceivedVector};

fn setup(m: usize) -> Codebook {
    let graph = FactorGraph::standard(4, 6, 2, 3).unwrap();
    Codebook::default_for(&graph, m).unwrap()
}

fn random_instance(
    cb: &Codebook,
    rng: &mut ChaCha8Rng,
    sigma: f64,
) -> (Vec<usize>, ChannelGains, Vec<Complex64>) {
    let m = cb.m();
    let gains = draw_direct_channels(6, 4, rng).into_gains();
    let sent: Vec<usize> = (0..6).map(|_| rng.random_range(0..m)).collect();
    let mut y = vec![Complex64::ZERO; 4];
    for r in 0..4 {
        for &u in cb.graph().users_on_resource(r) {
            y[r] += gains.get(u, r) * cb.entry(u, sent[u], r);
        }
    }
    if sigma > 0.0 {
        let noise = Normal::new(0.0, sigma).unwrap();
        for s in &mut y {
            *s += Complex64::new(noise.sample(rng), noise.sample(rng));
        }
    }
    (sent, gains, y)
}

/// Naive exhaustive search: builds every index vector by counting in base M
/// over a plain Vec, recomputes the full superposition from scratch each
/// time, keeps the first strict minimum.
fn naive_ml(y: &[Complex64], gains: &ChannelGains, cb: &Codebook) -> Vec<usize> {
    let m = cb.m();
    let mut candidate = vec![0usize; 6];
    let mut best = candidate.clone();
    let mut best_cost = f64::INFINITY;
    loop {
        let mut cost = 0.0;
        for r in 0..4 {
            let mut sum = Complex64::ZERO;
            for u in 0..6 {
                sum += gains.get(u, r) * cb.entry(u, candidate[u], r);
            }
            cost += (y[r] - sum).norm_sqr();
        }
        if cost < best_cost {
            best_cost = cost;
            best = candidate.clone();
        }
        // Increment with user 5 as the fastest digit, matching the
        // lowest-combination-index tie rule (user 0 most significant).
        let mut pos = 5usize;
        loop {
            candidate[pos] += 1;
            if candidate[pos] < m {
                break;
            }
            candidate[pos] = 0;
            if pos == 0 {
                return best;
            }
            pos -= 1;
        }
    }
}

/// Straight-line transcription of the two-stage procedure: resource sweep
/// with cancellation of already-detected users, then one user-by-user
/// refinement pass updating in place.
fn monolithic_two_stage(y: &[Complex64], gains: &ChannelGains, cb: &Codebook) -> Vec<usize> {
    let m = cb.m();
    let graph = cb.graph();
    let mut detected: Vec<Option<usize>> = vec![None; 6];

    // Stage 1.
    for r in 0..4 {
        if detected.iter().all(|d| d.is_some()) {
            break;
        }
        let pending: Vec<usize> = graph
            .users_on_resource(r)
            .iter()
            .copied()
            .filter(|&u| detected[u].is_none())
            .collect();
        if pending.is_empty() {
            continue;
        }
        let mut bar_y = y[r];
        for &u in graph.users_on_resource(r) {
            if let Some(cw) = detected[u] {
                bar_y -= gains.get(u, r) * cb.entry(u, cw, r);
            }
        }
        let mut best_assignment = vec![0usize; pending.len()];
        let mut best_cost = f64::INFINITY;
        let mut assignment = vec![0usize; pending.len()];
        'outer: loop {
            let mut sum = Complex64::ZERO;
            for (slot, &u) in assignment.iter().zip(pending.iter()) {
                sum += gains.get(u, r) * cb.entry(u, *slot, r);
            }
            let cost = (bar_y - sum).norm_sqr();
            if cost < best_cost {
                best_cost = cost;
                best_assignment = assignment.clone();
            }
            // Mixed-radix increment, first slot fastest (lowest combination
            // index first overall).
            for slot in assignment.iter_mut() {
                *slot += 1;
                if *slot < m {
                    continue 'outer;
                }
                *slot = 0;
            }
            break;
        }
        for (&u, &cw) in pending.iter().zip(best_assignment.iter()) {
            detected[u] = Some(cw);
        }
    }
    let mut estimate: Vec<usize> = detected.into_iter().map(Option::unwrap).collect();

    // Stage 2, one pass.
    for u in 0..6 {
        let mut best_cw = 0usize;
        let mut best_cost = f64::INFINITY;
        for cw in 0..m {
            let mut cost = 0.0;
            for &r in graph.resources_of_user(u) {
                let mut bar_y = y[r];
                for &other in graph.users_on_resource(r) {
                    if other != u {
                        bar_y -= gains.get(other, r) * cb.entry(other, estimate[other], r);
                    }
                }
                cost += (bar_y - gains.get(u, r) * cb.entry(u, cw, r)).norm_sqr();
            }
            if cost < best_cost {
                best_cost = cost;
                best_cw = cw;
            }
        }
        estimate[u] = best_cw;
    }
    estimate
}

#[test]
fn ml_matches_naive_double_loop_on_noisy_frames() {
    let cb = setup(2);
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    for _ in 0..100 {
        let (_, gains, y) = random_instance(&cb, &mut rng, 0.4);
        let rv = ReceivedVector::new(y.clone(), 0.32);
        let fast = ml_decode(&rv, &gains, &cb).unwrap();
        let slow = naive_ml(&y, &gains, &cb);
        assert_eq!(fast.indices, slow);
    }
}

#[test]
fn lc_matches_monolithic_transcription_on_noisy_frames() {
    for m in [2usize, 4] {
        let cb = setup(m);
        let mut rng = ChaCha8Rng::seed_from_u64(5678);
        for _ in 0..100 {
            let (_, gains, y) = random_instance(&cb, &mut rng, 0.3);
            let rv = ReceivedVector::new(y.clone(), 0.18);
            let fast = lc_decode(&rv, &gains, &cb, 1);
            let slow = monolithic_two_stage(&y, &gains, &cb);
            assert_eq!(fast.indices, slow);
        }
    }
}

#[test]
fn all_decoders_agree_on_noiseless_instances() {
    for m in [2usize, 4] {
        let cb = setup(m);
        let mut rng = ChaCha8Rng::seed_from_u64(91011);
        for _ in 0..100 {
            let (sent, gains, y) = random_instance(&cb, &mut rng, 0.0);
            let rv = ReceivedVector::new(y, 1e-30);
            let ml = ml_decode(&rv, &gains, &cb).unwrap();
            let mpa = mpa_decode(&rv, &gains, &cb, 8);
            let lc = lc_decode(&rv, &gains, &cb, 1);
            assert_eq!(ml.indices, sent);
            assert_eq!(mpa.indices, sent);
            assert_eq!(lc.indices, sent);
        }
    }
}
