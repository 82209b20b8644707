//! Closed-form decoding cost models.
//!
//! Counts the real additions (RA) and real multiplications (RM) each decoder
//! spends per codeword interval, as closed-form expressions in the system
//! parameters. Three schemes are modeled: message passing on the plain
//! channel, message passing on the surface-assisted channel (which pays an
//! extra `R * d_f * N` for assembling the effective gains), and the two-stage
//! low-complexity decoder. The LC expressions contain a graph-dependent
//! enumeration term, recomputed here by dry-running the stage-1 sweep
//! schedule.

use serde::Serialize;
use thiserror::Error;

use crate::codebook::FactorGraph;

#[derive(Debug, Error)]
pub enum ComplexityError {
    #[error("operation count exceeds the exact-integer range (2^64)")]
    Overflow,
    #[error("operation count is negative with these parameters")]
    Negative,
}

/// Parameters the cost formulas depend on. Graph-derived quantities are taken
/// from the graph itself so they cannot drift out of sync.
#[derive(Debug, Clone)]
pub struct ComplexityParams {
    pub graph: FactorGraph,
    /// Codewords per user.
    pub m: u64,
    /// Message-passing iterations.
    pub k: u64,
    /// Reflecting elements.
    pub n: u64,
}

impl ComplexityParams {
    pub fn new(graph: FactorGraph, m: u64, k: u64, n: u64) -> Self {
        assert!(m >= 1 && k >= 1 && n >= 1);
        Self { graph, m, k, n }
    }

    fn r(&self) -> i128 {
        self.graph.resources() as i128
    }

    fn u(&self) -> i128 {
        self.graph.users() as i128
    }

    fn df(&self) -> i128 {
        self.graph.df() as i128
    }

    fn dv(&self) -> i128 {
        self.graph.dv() as i128
    }

    fn m_pow_df(&self) -> Result<i128, ComplexityError> {
        checked_pow(self.m as i128, self.graph.df() as u32)
    }
}

/// The scheme whose decoding cost is being evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DecoderScheme {
    #[serde(rename = "SCMA-MPA")]
    ScmaMpa,
    #[serde(rename = "SCMA-RIS-MPA")]
    ScmaRisMpa,
    #[serde(rename = "SCMA-RIS-LC")]
    ScmaRisLc,
}

impl DecoderScheme {
    pub const ALL: [DecoderScheme; 3] = [
        DecoderScheme::ScmaMpa,
        DecoderScheme::ScmaRisMpa,
        DecoderScheme::ScmaRisLc,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            DecoderScheme::ScmaMpa => "SCMA-MPA",
            DecoderScheme::ScmaRisMpa => "SCMA-RIS-MPA",
            DecoderScheme::ScmaRisLc => "SCMA-RIS-LC",
        }
    }
}

/// Which operation count to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Metric {
    #[serde(rename = "RA")]
    RealAdditions,
    #[serde(rename = "RM")]
    RealMultiplications,
}

fn checked_pow(base: i128, exp: u32) -> Result<i128, ComplexityError> {
    base.checked_pow(exp).ok_or(ComplexityError::Overflow)
}

fn to_count(value: i128) -> Result<u64, ComplexityError> {
    if value < 0 {
        return Err(ComplexityError::Negative);
    }
    u64::try_from(value).map_err(|_| ComplexityError::Overflow)
}

/// RA of plain message passing:
/// `R d_f M^{d_f} (4 d_f + K + 1) - K R d_f`.
pub fn ra_scma_mpa(p: &ComplexityParams) -> Result<u64, ComplexityError> {
    let (r, df, k) = (p.r(), p.df(), p.k as i128);
    let v = r * df * p.m_pow_df()? * (4 * df + k + 1) - k * r * df;
    to_count(v)
}

/// RM of plain message passing:
/// `R d_f M^{d_f} (4 d_f + K d_f + 3) + M (d_v - 1)(K R d_f + U)`.
pub fn rm_scma_mpa(p: &ComplexityParams) -> Result<u64, ComplexityError> {
    let (r, df, dv, u, k, m) = (p.r(), p.df(), p.dv(), p.u(), p.k as i128, p.m as i128);
    let v = r * df * p.m_pow_df()? * (4 * df + k * df + 3) + m * (dv - 1) * (k * r * df + u);
    to_count(v)
}

/// RA of surface-assisted message passing:
/// `R d_f M^{d_f} (4 d_f + K + 1) + R d_f (N - K) + 1`.
pub fn ra_scma_ris_mpa(p: &ComplexityParams) -> Result<u64, ComplexityError> {
    let (r, df, k, n) = (p.r(), p.df(), p.k as i128, p.n as i128);
    let v = r * df * p.m_pow_df()? * (4 * df + k + 1) + r * df * (n - k) + 1;
    to_count(v)
}

/// RM of surface-assisted message passing: the plain-channel count plus
/// `R d_f N` for the effective-gain assembly.
pub fn rm_scma_ris_mpa(p: &ComplexityParams) -> Result<u64, ComplexityError> {
    let (r, df, n) = (p.r(), p.df(), p.n as i128);
    let v = rm_scma_mpa(p)? as i128 + r * df * n;
    to_count(v)
}

/// Graph-dependent enumeration term of the two-stage decoder: the sum of
/// `M^{U'_r}` over the stage-1 sweep, where `U'_r` is the number of users
/// still undetected when the sweep reaches resource `r`. Computed by
/// dry-running the schedule; elements with `U'_r = 0` contribute nothing and
/// the sweep stops once every user is detected.
pub fn lc_enumeration_sum(graph: &FactorGraph, m: u64) -> Result<u64, ComplexityError> {
    let mut detected = vec![false; graph.users()];
    let mut n_detected = 0usize;
    let mut sum: i128 = 0;
    for r in 0..graph.resources() {
        if n_detected == graph.users() {
            break;
        }
        let pending: Vec<usize> = graph
            .users_on_resource(r)
            .iter()
            .copied()
            .filter(|&u| !detected[u])
            .collect();
        if pending.is_empty() {
            continue;
        }
        sum += checked_pow(m as i128, pending.len() as u32)?;
        for u in pending {
            detected[u] = true;
            n_detected += 1;
        }
    }
    to_count(sum)
}

/// RA of the two-stage decoder:
/// `R (2 d_f - 1) + (4 d_f + 1)(U M + sum M^{U'_r}) + R d_f N + 1`.
pub fn ra_scma_ris_lc(p: &ComplexityParams) -> Result<u64, ComplexityError> {
    let (r, df, u, n, m) = (p.r(), p.df(), p.u(), p.n as i128, p.m as i128);
    let sum = lc_enumeration_sum(&p.graph, p.m)? as i128;
    let v = r * (2 * df - 1) + (4 * df + 1) * (u * m + sum) + r * df * n + 1;
    to_count(v)
}

/// RM of the two-stage decoder:
/// `2 R d_f + (4 d_f + 2)(U M + sum M^{U'_r}) + R d_f N`.
pub fn rm_scma_ris_lc(p: &ComplexityParams) -> Result<u64, ComplexityError> {
    let (r, df, u, n, m) = (p.r(), p.df(), p.u(), p.n as i128, p.m as i128);
    let sum = lc_enumeration_sum(&p.graph, p.m)? as i128;
    let v = 2 * r * df + (4 * df + 2) * (u * m + sum) + r * df * n;
    to_count(v)
}

/// Operation count for one (scheme, metric) pair.
pub fn count(
    scheme: DecoderScheme,
    metric: Metric,
    p: &ComplexityParams,
) -> Result<u64, ComplexityError> {
    match (scheme, metric) {
        (DecoderScheme::ScmaMpa, Metric::RealAdditions) => ra_scma_mpa(p),
        (DecoderScheme::ScmaMpa, Metric::RealMultiplications) => rm_scma_mpa(p),
        (DecoderScheme::ScmaRisMpa, Metric::RealAdditions) => ra_scma_ris_mpa(p),
        (DecoderScheme::ScmaRisMpa, Metric::RealMultiplications) => rm_scma_ris_mpa(p),
        (DecoderScheme::ScmaRisLc, Metric::RealAdditions) => ra_scma_ris_lc(p),
        (DecoderScheme::ScmaRisLc, Metric::RealMultiplications) => rm_scma_ris_lc(p),
    }
}

/// Relative change of scheme `b` over scheme `a` in percent:
/// `(count_b - count_a) / count_a * 100`.
pub fn compare(
    a: DecoderScheme,
    b: DecoderScheme,
    metric: Metric,
    p: &ComplexityParams,
) -> Result<f64, ComplexityError> {
    let ca = count(a, metric, p)? as f64;
    let cb = count(b, metric, p)? as f64;
    Ok((cb - ca) / ca * 100.0)
}

/// Rounds a percentage to one decimal, the resolution the reports use.
pub fn round_percent(value: f64) -> f64 {
    (value * 10.0).round() / 10.0
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// One rendered comparison for a fixed (M, N, K): absolute counts per scheme
/// plus relative deltas against the plain-channel baseline.
#[derive(Debug, Clone, Serialize)]
pub struct ComplexityReport {
    pub m: u64,
    pub n: u64,
    pub k: u64,
    pub rows: Vec<SchemeRow>,
    pub deltas_vs_scma_mpa: Vec<DeltaRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SchemeRow {
    pub scheme: DecoderScheme,
    pub ra: u64,
    pub rm: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaRow {
    pub scheme: DecoderScheme,
    pub ra_percent: f64,
    pub rm_percent: f64,
}

impl ComplexityReport {
    /// Builds the report for the given schemes (pass `DecoderScheme::ALL`
    /// for the full three-row table).
    pub fn build(
        p: &ComplexityParams,
        schemes: &[DecoderScheme],
    ) -> Result<Self, ComplexityError> {
        let mut rows = Vec::with_capacity(schemes.len());
        for &scheme in schemes {
            rows.push(SchemeRow {
                scheme,
                ra: count(scheme, Metric::RealAdditions, p)?,
                rm: count(scheme, Metric::RealMultiplications, p)?,
            });
        }
        let mut deltas = Vec::new();
        if schemes.contains(&DecoderScheme::ScmaMpa) {
            for &scheme in schemes {
                if scheme == DecoderScheme::ScmaMpa {
                    continue;
                }
                deltas.push(DeltaRow {
                    scheme,
                    ra_percent: round_percent(compare(
                        DecoderScheme::ScmaMpa,
                        scheme,
                        Metric::RealAdditions,
                        p,
                    )?),
                    rm_percent: round_percent(compare(
                        DecoderScheme::ScmaMpa,
                        scheme,
                        Metric::RealMultiplications,
                        p,
                    )?),
                });
            }
        }
        Ok(Self {
            m: p.m,
            n: p.n,
            k: p.k,
            rows,
            deltas_vs_scma_mpa: deltas,
        })
    }

    /// Aligned text rendering, one scheme per row.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "Decoding complexity (M={}, N={}, K={})\n",
            self.m, self.n, self.k
        ));
        out.push_str(&format!("{:<14} {:>12} {:>12}\n", "scheme", "RA", "RM"));
        for row in &self.rows {
            out.push_str(&format!(
                "{:<14} {:>12} {:>12}\n",
                row.scheme.name(),
                row.ra,
                row.rm
            ));
        }
        for delta in &self.deltas_vs_scma_mpa {
            out.push_str(&format!(
                "{:<14} vs SCMA-MPA: RA {:+.1}%, RM {:+.1}%\n",
                delta.scheme.name(),
                delta.ra_percent,
                delta.rm_percent
            ));
        }
        out
    }
}
