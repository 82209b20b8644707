//! Fading channels and the reflecting-surface phase control.
//!
//! Every link coefficient is drawn as a unit-variance circularly symmetric
//! complex Gaussian and stored in polar form: `h = alpha * e^{-j theta}` for
//! the user-to-surface hop and `g = beta * e^{-j vartheta}` for the
//! surface-to-receiver hop. The surface applies a per-element, per-resource
//! phase `phi`, leaving each reflected term with residual phase
//! `Theta = phi - (theta + vartheta)`. The effective per-user gain on a
//! resource element is the coherent sum of the `N` reflected terms.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::codebook::FactorGraph;

/// Wraps an angle into `[-pi, pi)`.
pub fn wrap_phase(x: f64) -> f64 {
    use std::f64::consts::PI;
    let wrapped = x - 2.0 * PI * ((x + PI) / (2.0 * PI)).floor();
    // Guard the x = +pi boundary against rounding.
    if wrapped >= PI {
        -PI
    } else {
        wrapped
    }
}

/// Dense complex gain matrix coupling each user's symbol on each resource
/// element to the receiver. Shared decoding interface for both the
/// surface-assisted and the direct (baseline) channel.
#[derive(Debug, Clone)]
pub struct ChannelGains {
    users: usize,
    resources: usize,
    h: Vec<Complex64>,
}

impl ChannelGains {
    pub fn new(users: usize, resources: usize, h: Vec<Complex64>) -> Self {
        assert_eq!(h.len(), users * resources);
        Self { users, resources, h }
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn resources(&self) -> usize {
        self.resources
    }

    #[inline]
    pub fn get(&self, user: usize, resource: usize) -> Complex64 {
        self.h[user * self.resources + resource]
    }

    #[inline]
    fn set(&mut self, user: usize, resource: usize, value: Complex64) {
        self.h[user * self.resources + resource] = value;
    }
}

// ---------------------------------------------------------------------------
// Channel realizations
// ---------------------------------------------------------------------------

/// One block-fading realization of all reflected links, in polar form.
///
/// `alpha`/`theta` are indexed `[user][element][resource]`, `beta`/`vartheta`
/// `[element][resource]`. Magnitudes are Rayleigh with `E[alpha^2] = 1`;
/// phases lie in `[-pi, pi)`.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    users: usize,
    elements: usize,
    resources: usize,
    alpha: Vec<f64>,
    theta: Vec<f64>,
    beta: Vec<f64>,
    vartheta: Vec<f64>,
}

impl ChannelRealization {
    #[inline]
    fn uidx(&self, u: usize, n: usize, r: usize) -> usize {
        (u * self.elements + n) * self.resources + r
    }

    #[inline]
    fn gidx(&self, n: usize, r: usize) -> usize {
        n * self.resources + r
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    pub fn resources(&self) -> usize {
        self.resources
    }

    pub fn alpha(&self, u: usize, n: usize, r: usize) -> f64 {
        self.alpha[self.uidx(u, n, r)]
    }

    pub fn theta(&self, u: usize, n: usize, r: usize) -> f64 {
        self.theta[self.uidx(u, n, r)]
    }

    pub fn beta(&self, n: usize, r: usize) -> f64 {
        self.beta[self.gidx(n, r)]
    }

    pub fn vartheta(&self, n: usize, r: usize) -> f64 {
        self.vartheta[self.gidx(n, r)]
    }

    /// Cascaded phase `theta + vartheta`, wrapped into `[-pi, pi)`.
    pub fn cascade_phase(&self, u: usize, n: usize, r: usize) -> f64 {
        wrap_phase(self.theta(u, n, r) + self.vartheta(n, r))
    }

    /// Scales every user-side magnitude by `lambda > 0` (test hook for
    /// linearity checks).
    pub fn scale_alpha(&mut self, lambda: f64) {
        assert!(lambda > 0.0);
        for a in &mut self.alpha {
            *a *= lambda;
        }
    }

    /// Overrides one reflected link (test hook for hand-set scenarios).
    pub fn set_user_link(&mut self, u: usize, n: usize, r: usize, alpha: f64, theta: f64) {
        let i = self.uidx(u, n, r);
        self.alpha[i] = alpha;
        self.theta[i] = wrap_phase(theta);
    }

    /// Overrides one surface-to-receiver link (test hook).
    pub fn set_receiver_link(&mut self, n: usize, r: usize, beta: f64, vartheta: f64) {
        let i = self.gidx(n, r);
        self.beta[i] = beta;
        self.vartheta[i] = wrap_phase(vartheta);
    }
}

fn polar_from_gaussian<R: Rng>(dist: &Normal<f64>, rng: &mut R) -> (f64, f64) {
    let re = dist.sample(rng);
    let im = dist.sample(rng);
    let h = Complex64::new(re, im);
    // h = alpha * e^{-j theta}  =>  theta = -arg(h).
    (h.norm(), wrap_phase(-h.arg()))
}

/// Draws a full block-fading realization. Draw order is fixed: all
/// user-to-surface links in `(user, element, resource)` order, then all
/// surface-to-receiver links in `(element, resource)` order.
pub fn draw_channels<R: Rng>(
    users: usize,
    resources: usize,
    elements: usize,
    rng: &mut R,
) -> ChannelRealization {
    assert!(elements >= 1);
    let dist = Normal::new(0.0, (0.5f64).sqrt()).unwrap();
    let mut real = ChannelRealization {
        users,
        elements,
        resources,
        alpha: vec![0.0; users * elements * resources],
        theta: vec![0.0; users * elements * resources],
        beta: vec![0.0; elements * resources],
        vartheta: vec![0.0; elements * resources],
    };
    for u in 0..users {
        for n in 0..elements {
            for r in 0..resources {
                let (a, t) = polar_from_gaussian(&dist, rng);
                let i = real.uidx(u, n, r);
                real.alpha[i] = a;
                real.theta[i] = t;
            }
        }
    }
    for n in 0..elements {
        for r in 0..resources {
            let (b, v) = polar_from_gaussian(&dist, rng);
            let i = real.gidx(n, r);
            real.beta[i] = b;
            real.vartheta[i] = v;
        }
    }
    real
}

// ---------------------------------------------------------------------------
// Phase control
// ---------------------------------------------------------------------------

/// Grid resolution used when a configuration names the grid-search mode
/// without a point count.
pub const DEFAULT_GRID_POINTS: usize = 1024;

/// How the surface picks its per-element phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseMode {
    /// No adjustment: `phi = 0` everywhere.
    Blind,
    /// Component-wise median (in circular geometry) of the cascaded phases
    /// of the users sharing each resource element.
    Optimized,
    /// Arithmetic mean of the same set (exact minimizer of the squared
    /// phase-misalignment objective on the real line).
    Mean,
    /// Argmin of the squared objective over a uniform grid on `[-pi, pi]`
    /// (oracle mode).
    GridSearch { points: usize },
}

impl PhaseMode {
    pub fn name(&self) -> &'static str {
        match self {
            PhaseMode::Blind => "blind",
            PhaseMode::Optimized => "optimized",
            PhaseMode::Mean => "mean",
            PhaseMode::GridSearch { .. } => "grid-search",
        }
    }
}

impl std::fmt::Display for PhaseMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PhaseMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "blind" => Ok(PhaseMode::Blind),
            "optimized" => Ok(PhaseMode::Optimized),
            "mean" => Ok(PhaseMode::Mean),
            "grid-search" => Ok(PhaseMode::GridSearch {
                points: DEFAULT_GRID_POINTS,
            }),
            other => Err(format!(
                "unknown phase mode {other:?} (expected blind, optimized, mean or grid-search)"
            )),
        }
    }
}

impl serde::Serialize for PhaseMode {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> serde::Deserialize<'de> for PhaseMode {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Per-element, per-resource surface phases in `[-pi, pi)`.
#[derive(Debug, Clone)]
pub struct PhaseConfiguration {
    elements: usize,
    resources: usize,
    phi: Vec<f64>,
    mode: PhaseMode,
}

impl PhaseConfiguration {
    pub fn phi(&self, n: usize, r: usize) -> f64 {
        self.phi[n * self.resources + r]
    }

    pub fn mode(&self) -> PhaseMode {
        self.mode
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    pub fn resources(&self) -> usize {
        self.resources
    }
}

/// Squared phase-misalignment objective for one element: the sum over the
/// sharing users of `(phi - cascade_phase)^2`.
pub fn phase_objective(phi: f64, cascades: &[f64]) -> f64 {
    cascades.iter().map(|&s| (phi - s) * (phi - s)).sum()
}

/// Median of phases in circular geometry: the input value minimizing the sum
/// of wrapped absolute differences to the others (ties to the first). For
/// inputs that do not straddle the +-pi boundary this is the ordinary middle
/// value; when they do, it respects the short way around the circle instead
/// of the cut at +-pi.
fn circular_median(values: &[f64]) -> f64 {
    let mut best = values[0];
    let mut best_cost = f64::INFINITY;
    for &candidate in values {
        let cost: f64 = values.iter().map(|&s| wrap_phase(candidate - s).abs()).sum();
        if cost < best_cost {
            best_cost = cost;
            best = candidate;
        }
    }
    best
}

/// Computes the surface phases for one realization.
///
/// Cascaded phases are wrapped into `[-pi, pi)` before aggregation. The
/// median mode aggregates in circular geometry; the mean and grid modes
/// treat the wrapped values as plain reals, matching the squared objective
/// they optimize.
pub fn optimize_phases(
    realization: &ChannelRealization,
    graph: &FactorGraph,
    mode: PhaseMode,
) -> PhaseConfiguration {
    let elements = realization.elements();
    let resources = realization.resources();
    let mut phi = vec![0.0; elements * resources];
    if mode != PhaseMode::Blind {
        let mut cascades = Vec::with_capacity(graph.df());
        for n in 0..elements {
            for r in 0..resources {
                cascades.clear();
                cascades.extend(
                    graph
                        .users_on_resource(r)
                        .iter()
                        .map(|&u| realization.cascade_phase(u, n, r)),
                );
                assert!(!cascades.is_empty(), "resource {r} has no users");
                phi[n * resources + r] = match mode {
                    PhaseMode::Blind => unreachable!(),
                    PhaseMode::Optimized => circular_median(&cascades),
                    PhaseMode::Mean => cascades.iter().sum::<f64>() / cascades.len() as f64,
                    PhaseMode::GridSearch { points } => {
                        grid_argmin(&cascades, points)
                    }
                };
            }
        }
    }
    PhaseConfiguration {
        elements,
        resources,
        phi,
        mode,
    }
}

fn grid_argmin(cascades: &[f64], points: usize) -> f64 {
    use std::f64::consts::PI;
    assert!(points >= 2);
    let step = 2.0 * PI / (points - 1) as f64;
    let mut best = -PI;
    let mut best_obj = f64::INFINITY;
    for i in 0..points {
        let phi = -PI + i as f64 * step;
        let obj = phase_objective(phi, cascades);
        if obj < best_obj {
            best_obj = obj;
            best = phi;
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Effective and direct channels
// ---------------------------------------------------------------------------

/// Per-user per-resource scalar obtained by summing the `N` adjusted
/// reflected terms, `sum_n alpha * beta * e^{j Theta}`.
#[derive(Debug, Clone)]
pub struct EffectiveChannel {
    gains: ChannelGains,
}

impl EffectiveChannel {
    pub fn gains(&self) -> &ChannelGains {
        &self.gains
    }

    pub fn into_gains(self) -> ChannelGains {
        self.gains
    }
}

/// Baseline channel without the surface: i.i.d. unit-variance complex
/// Gaussian gains per (user, resource).
#[derive(Debug, Clone)]
pub struct DirectChannel {
    gains: ChannelGains,
}

impl DirectChannel {
    pub fn gains(&self) -> &ChannelGains {
        &self.gains
    }

    pub fn into_gains(self) -> ChannelGains {
        self.gains
    }
}

/// Combines a realization with a phase configuration into the effective
/// per-user gains. Entries are populated for every (user, resource) pair;
/// only pairs present in the factor graph carry signal downstream.
pub fn effective_channel(
    realization: &ChannelRealization,
    phases: &PhaseConfiguration,
) -> EffectiveChannel {
    assert_eq!(realization.elements(), phases.elements());
    assert_eq!(realization.resources(), phases.resources());
    let users = realization.users();
    let resources = realization.resources();
    let mut gains = ChannelGains::new(users, resources, vec![Complex64::ZERO; users * resources]);
    for u in 0..users {
        for r in 0..resources {
            let mut sum = Complex64::ZERO;
            for n in 0..realization.elements() {
                let residual = phases.phi(n, r) - realization.cascade_phase(u, n, r);
                sum += Complex64::from_polar(
                    realization.alpha(u, n, r) * realization.beta(n, r),
                    residual,
                );
            }
            gains.set(u, r, sum);
        }
    }
    EffectiveChannel { gains }
}

/// Draws the baseline (no surface) channel matrix. Draw order is
/// `(user, resource)` row-major.
pub fn draw_direct_channels<R: Rng>(
    users: usize,
    resources: usize,
    rng: &mut R,
) -> DirectChannel {
    let dist = Normal::new(0.0, (0.5f64).sqrt()).unwrap();
    let h = (0..users * resources)
        .map(|_| Complex64::new(dist.sample(rng), dist.sample(rng)))
        .collect();
    DirectChannel {
        gains: ChannelGains::new(users, resources, h),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn standard() -> FactorGraph {
        FactorGraph::standard(4, 6, 2, 3).unwrap()
    }

    #[test]
    fn draw_is_deterministic_for_fixed_seed() {
        let a = draw_channels(6, 4, 8, &mut ChaCha8Rng::seed_from_u64(3));
        let b = draw_channels(6, 4, 8, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a.alpha, b.alpha);
        assert_eq!(a.theta, b.theta);
        assert_eq!(a.beta, b.beta);
        assert_eq!(a.vartheta, b.vartheta);
    }

    #[test]
    fn link_coefficients_have_unit_second_moment() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let real = draw_channels(5, 5, 4_000, &mut rng);
        let n_links = real.alpha.len();
        assert!(n_links >= 100_000);
        let mean_sq: f64 = real.alpha.iter().map(|a| a * a).sum::<f64>() / n_links as f64;
        assert!((mean_sq - 1.0).abs() < 0.01, "E|h|^2 = {mean_sq}");
        let mean_sq_g: f64 =
            real.beta.iter().map(|b| b * b).sum::<f64>() / real.beta.len() as f64;
        assert!((mean_sq_g - 1.0).abs() < 0.03, "E|g|^2 = {mean_sq_g}");
    }

    #[test]
    fn phases_stay_in_range() {
        let real = draw_channels(6, 4, 16, &mut ChaCha8Rng::seed_from_u64(5));
        for t in real.theta.iter().chain(real.vartheta.iter()) {
            assert!((-PI..PI).contains(t), "phase {t} out of range");
        }
    }

    #[test]
    fn blind_mode_is_all_zero() {
        let real = draw_channels(6, 4, 8, &mut ChaCha8Rng::seed_from_u64(9));
        let phases = optimize_phases(&real, &standard(), PhaseMode::Blind);
        for n in 0..8 {
            for r in 0..4 {
                assert_eq!(phases.phi(n, r), 0.0);
            }
        }
    }

    #[test]
    fn single_user_resource_combines_coherently() {
        // Degenerate graph: one user on two resources, d_f = 1.
        let graph = FactorGraph::standard(2, 1, 2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let real = draw_channels(1, 2, 1, &mut rng);
        let phases = optimize_phases(&real, &graph, PhaseMode::Optimized);
        let mean = optimize_phases(&real, &graph, PhaseMode::Mean);
        for r in 0..2 {
            // Median of one value equals the mean of one value.
            assert_eq!(phases.phi(0, r), mean.phi(0, r));
            assert_eq!(phases.phi(0, r), real.cascade_phase(0, 0, r));
        }
        let eff = effective_channel(&real, &phases);
        for r in 0..2 {
            let expected = real.alpha(0, 0, r) * real.beta(0, r);
            let h = eff.gains().get(0, r);
            assert!((h.re - expected).abs() < 1e-12);
            assert!(h.im.abs() < 1e-12);
        }
    }

    #[test]
    fn median_mean_and_grid_on_known_phases() {
        // One user triple with cascaded phases {0.1, 0.2, 0.9}.
        let graph = standard();
        let mut real = draw_channels(6, 4, 1, &mut ChaCha8Rng::seed_from_u64(23));
        let users = graph.users_on_resource(0).to_vec();
        assert_eq!(users, vec![0, 1, 2]);
        let targets = [0.1, 0.2, 0.9];
        for (&u, &t) in users.iter().zip(targets.iter()) {
            real.set_user_link(u, 0, 0, 1.0, t);
        }
        real.set_receiver_link(0, 0, 1.0, 0.0);

        let med = optimize_phases(&real, &graph, PhaseMode::Optimized).phi(0, 0);
        let mean = optimize_phases(&real, &graph, PhaseMode::Mean).phi(0, 0);
        assert!((med - 0.2).abs() < 1e-12);
        assert!((mean - 0.4).abs() < 1e-12);

        let grid = optimize_phases(&real, &graph, PhaseMode::GridSearch { points: 100_000 })
            .phi(0, 0);
        let cascades: Vec<f64> = users.iter().map(|&u| real.cascade_phase(u, 0, 0)).collect();
        let obj_grid = phase_objective(grid, &cascades);
        assert!(obj_grid <= phase_objective(med, &cascades) + 1e-8);
        assert!(obj_grid <= phase_objective(mean, &cascades) + 1e-8);
    }

    #[test]
    fn median_respects_the_circle_near_the_boundary() {
        // {-3.0, 3.0, 3.1} cluster together around +-pi: on the circle the
        // middle value is 3.1, while a flat sort would pick 3.0.
        let graph = standard();
        let mut real = draw_channels(6, 4, 1, &mut ChaCha8Rng::seed_from_u64(27));
        let users = graph.users_on_resource(0).to_vec();
        for (&u, &t) in users.iter().zip([-3.0, 3.0, 3.1].iter()) {
            real.set_user_link(u, 0, 0, 1.0, t);
        }
        real.set_receiver_link(0, 0, 1.0, 0.0);
        let med = optimize_phases(&real, &graph, PhaseMode::Optimized).phi(0, 0);
        assert!((med - 3.1).abs() < 1e-12, "median {med}");
    }

    #[test]
    fn grid_search_dominates_within_resolution_slack() {
        let graph = standard();
        let points = 4096;
        let slack = graph.df() as f64 * (PI / (points - 1) as f64).powi(2) + 1e-12;
        for seed in 0..20 {
            let real = draw_channels(6, 4, 3, &mut ChaCha8Rng::seed_from_u64(seed));
            let med = optimize_phases(&real, &graph, PhaseMode::Optimized);
            let mean = optimize_phases(&real, &graph, PhaseMode::Mean);
            let grid = optimize_phases(&real, &graph, PhaseMode::GridSearch { points });
            for n in 0..3 {
                for r in 0..4 {
                    let cascades: Vec<f64> = graph
                        .users_on_resource(r)
                        .iter()
                        .map(|&u| real.cascade_phase(u, n, r))
                        .collect();
                    let g = phase_objective(grid.phi(n, r), &cascades);
                    assert!(g <= phase_objective(med.phi(n, r), &cascades) + slack);
                    assert!(g <= phase_objective(mean.phi(n, r), &cascades) + slack);
                }
            }
        }
    }

    #[test]
    fn destructive_two_element_sum_cancels() {
        let graph = FactorGraph::standard(2, 1, 2, 1).unwrap();
        let mut real = draw_channels(1, 2, 2, &mut ChaCha8Rng::seed_from_u64(29));
        // Element 0: cascade 0; element 1: cascade pi (split across hops to
        // keep each stored phase in range). Blind phases leave Theta = -cascade.
        real.set_user_link(0, 0, 0, 1.0, 0.0);
        real.set_receiver_link(0, 0, 1.0, 0.0);
        real.set_user_link(0, 1, 0, 1.0, PI / 2.0);
        real.set_receiver_link(1, 0, 1.0, PI / 2.0);
        let phases = optimize_phases(&real, &graph, PhaseMode::Blind);
        let h = effective_channel(&real, &phases).gains().get(0, 0);
        assert!(h.norm() < 1e-12, "expected cancellation, got {h}");
    }

    #[test]
    fn triangle_inequality_on_effective_gain() {
        let graph = standard();
        let real = draw_channels(6, 4, 12, &mut ChaCha8Rng::seed_from_u64(31));
        for mode in [PhaseMode::Blind, PhaseMode::Optimized] {
            let phases = optimize_phases(&real, &graph, mode);
            let eff = effective_channel(&real, &phases);
            for u in 0..6 {
                for r in 0..4 {
                    let bound: f64 =
                        (0..12).map(|n| real.alpha(u, n, r) * real.beta(n, r)).sum();
                    assert!(eff.gains().get(u, r).norm() <= bound + 1e-9);
                }
            }
        }
    }

    #[test]
    fn optimized_beats_blind_on_average() {
        let graph = standard();
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let mut blind_sum = 0.0;
        let mut opt_sum = 0.0;
        let mut count = 0usize;
        for _ in 0..100 {
            let real = draw_channels(6, 4, 20, &mut rng);
            let blind = effective_channel(&real, &optimize_phases(&real, &graph, PhaseMode::Blind));
            let opt =
                effective_channel(&real, &optimize_phases(&real, &graph, PhaseMode::Optimized));
            for u in 0..6 {
                for r in 0..4 {
                    if graph.occupies(u, r) {
                        blind_sum += blind.gains().get(u, r).norm();
                        opt_sum += opt.gains().get(u, r).norm();
                        count += 1;
                    }
                }
            }
        }
        let blind_avg = blind_sum / count as f64;
        let opt_avg = opt_sum / count as f64;
        assert!(
            opt_avg > blind_avg,
            "optimized avg |H| = {opt_avg}, blind = {blind_avg}"
        );
    }

    #[test]
    fn blind_gain_power_scales_with_element_count() {
        let graph = standard();
        let elements = 16;
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let mut sum = 0.0;
        let mut count = 0usize;
        for _ in 0..10_000 {
            let real = draw_channels(1, 1, elements, &mut rng);
            let phases = optimize_phases(&real, &graph, PhaseMode::Blind);
            sum += effective_channel(&real, &phases).gains().get(0, 0).norm_sqr();
            count += 1;
        }
        let mean = sum / count as f64;
        let expected = elements as f64;
        assert!(
            (mean - expected).abs() / expected < 0.05,
            "E|H|^2 = {mean}, expected {expected}"
        );
    }

    #[test]
    fn effective_gain_is_linear_in_user_magnitudes() {
        let graph = standard();
        let mut real = draw_channels(6, 4, 8, &mut ChaCha8Rng::seed_from_u64(43));
        let phases = optimize_phases(&real, &graph, PhaseMode::Optimized);
        let before = effective_channel(&real, &phases);
        real.scale_alpha(2.5);
        let after = effective_channel(&real, &phases);
        for u in 0..6 {
            for r in 0..4 {
                let scaled = before.gains().get(u, r) * 2.5;
                let got = after.gains().get(u, r);
                assert!((scaled - got).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn direct_channel_shape_and_determinism() {
        let a = draw_direct_channels(6, 4, &mut ChaCha8Rng::seed_from_u64(47));
        let b = draw_direct_channels(6, 4, &mut ChaCha8Rng::seed_from_u64(47));
        assert_eq!(a.gains().users(), 6);
        assert_eq!(a.gains().resources(), 4);
        for u in 0..6 {
            for r in 0..4 {
                assert_eq!(a.gains().get(u, r), b.gains().get(u, r));
            }
        }
    }

    #[test]
    fn direct_channel_unit_second_moment() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let mut sum = 0.0;
        let mut count = 0usize;
        for _ in 0..5_000 {
            let ch = draw_direct_channels(5, 4, &mut rng);
            for u in 0..5 {
                for r in 0..4 {
                    sum += ch.gains().get(u, r).norm_sqr();
                    count += 1;
                }
            }
        }
        assert!(count >= 100_000);
        let mean = sum / count as f64;
        assert!((mean - 1.0).abs() < 0.01, "E|H|^2 = {mean}");
    }

    #[test]
    fn wrap_phase_range_and_fixed_points() {
        assert_eq!(wrap_phase(0.0), 0.0);
        assert!((wrap_phase(3.0 * PI) - (-PI)).abs() < 1e-12);
        assert!((wrap_phase(-3.0 * PI) - (-PI)).abs() < 1e-12);
        for i in -100..100 {
            let x = i as f64 * 0.37;
            let w = wrap_phase(x);
            assert!((-PI..PI).contains(&w));
            // Same angle modulo 2 pi.
            assert!(((x - w) / (2.0 * PI)).rem_euclid(1.0) < 1e-9
                || ((x - w) / (2.0 * PI)).rem_euclid(1.0) > 1.0 - 1e-9);
        }
    }
}
