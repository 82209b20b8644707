//! Scratch comparison of phase-combining rules for the optimized mode.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use scma_ris::channel::{draw_channels, wrap_phase, ChannelGains};
use scma_ris::codebook::{bits_to_indices, indices_to_bits, Codebook, FactorGraph};
use scma_ris::decoders::{mpa_decode, superimposed_signal, ReceivedVector};
use scma_ris::sim::{frame_rng, noise_variance, snr_at_ber};

#[derive(Clone, Copy, Debug)]
enum Rule {
    LinMedian,
    CircMedoid,
    CircMean,
    FermatAngle,
    PerUserCoherent, // upper bound, not physically shared
}

fn combine(rule: Rule, cascades: &[f64]) -> f64 {
    match rule {
        Rule::LinMedian => {
            let mut v = cascades.to_vec();
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let n = v.len();
            if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) }
        }
        Rule::CircMedoid => {
            let mut best = cascades[0];
            let mut best_cost = f64::INFINITY;
            for &c in cascades {
                let cost: f64 = cascades.iter().map(|&s| wrap_phase(c - s).abs()).sum();
                if cost < best_cost {
                    best_cost = cost;
                    best = c;
                }
            }
            best
        }
        Rule::CircMean => {
            let sum: Complex64 = cascades
                .iter()
                .map(|&s| Complex64::from_polar(1.0, s))
                .sum();
            sum.arg()
        }
        Rule::FermatAngle => {
            let points: Vec<Complex64> = cascades
                .iter()
                .map(|&s| Complex64::from_polar(1.0, s))
                .collect();
            let mut p: Complex64 = points.iter().sum::<Complex64>() / points.len() as f64;
            for _ in 0..30 {
                let mut num = Complex64::ZERO;
                let mut den = 0.0;
                let mut at_point = None;
                for &x in &points {
                    let d = (p - x).norm();
                    if d < 1e-12 {
                        at_point = Some(x);
                        break;
                    }
                    num += x / d;
                    den += 1.0 / d;
                }
                p = match at_point {
                    Some(x) => {
                        p = x;
                        break;
                    }
                    None => num / den,
                };
            }
            p.arg()
        }
        Rule::PerUserCoherent => unreachable!(),
    }
}

fn run_curve(rule: Rule, n: usize, snrs: &[f64], max_frames: u64, seed: u64) -> Vec<(f64, f64)> {
    let graph = FactorGraph::standard(4, 6, 2, 3).unwrap();
    let cb = Codebook::default_for(&graph, 2).unwrap();
    let mut out = Vec::new();
    for &snr in snrs {
        let mut errors = 0u64;
        let mut frames = 0u64;
        for frame in 0..max_frames {
            let mut rng = frame_rng(seed, frame);
            let bits: Vec<u8> = (0..6).map(|_| rng.random_range(0..2u8)).collect();
            let indices = bits_to_indices(&bits, &cb).unwrap();
            let real = draw_channels(6, 4, n, &mut rng);
            // Build gains per rule.
            let mut h = vec![Complex64::ZERO; 24];
            match rule {
                Rule::PerUserCoherent => {
                    for u in 0..6 {
                        for r in 0..4 {
                            let mut sum = Complex64::ZERO;
                            for e in 0..n {
                                sum += Complex64::from_polar(real.alpha(u, e, r) * real.beta(e, r), 0.0);
                            }
                            h[u * 4 + r] = sum;
                        }
                    }
                }
                _ => {
                    for e in 0..n {
                        for r in 0..4 {
                            let cascades: Vec<f64> = graph
                                .users_on_resource(r)
                                .iter()
                                .map(|&u| real.cascade_phase(u, e, r))
                                .collect();
                            let phi = combine(rule, &cascades);
                            for u in 0..6 {
                                h[u * 4 + r] += Complex64::from_polar(
                                    real.alpha(u, e, r) * real.beta(e, r),
                                    phi - real.cascade_phase(u, e, r),
                                );
                            }
                        }
                    }
                }
            }
            let gains = ChannelGains::new(6, 4, h);
            let n0 = noise_variance(snr, 1);
            let mut y = superimposed_signal(&gains, &cb, &indices);
            let dist = Normal::new(0.0, (n0 / 2.0).sqrt()).unwrap();
            for s in &mut y {
                *s += Complex64::new(dist.sample(&mut rng), dist.sample(&mut rng));
            }
            let rv = ReceivedVector::new(y, n0);
            let dec = mpa_decode(&rv, &gains, &cb, 4);
            let rx_bits = indices_to_bits(&dec.indices, &cb).unwrap();
            errors += bits.iter().zip(rx_bits.iter()).filter(|(a, b)| a != b).count() as u64;
            frames += 1;
            if errors > 600 && frame > 2000 {
                break;
            }
        }
        out.push((snr, errors as f64 / (frames * 6) as f64));
    }
    out
}

fn main() {
    // Conventional reference positions measured earlier.
    let conv_1e2 = 9.2f64;
    let conv_1e3 = 13.5f64;
    for rule in [Rule::FermatAngle, Rule::CircMedoid] {
        for n in [20usize, 30, 40] {
            let snrs: Vec<f64> = (-30..=-4).step_by(2).map(|x| x as f64).collect();
            let curve = run_curve(rule, n, &snrs, 60_000, 5);
            let p2 = snr_at_ber(&curve, 1e-2);
            let p3 = snr_at_ber(&curve, 1e-3);
            println!(
                "{rule:?} N={n}: gain@1e-2 = {}, gain@1e-3 = {}",
                p2.map(|p| format!("{:.1}", conv_1e2 - p)).unwrap_or("?".into()),
                p3.map(|p| format!("{:.1}", conv_1e3 - p)).unwrap_or("?".into()),
            );
        }
    }
}
