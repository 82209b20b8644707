//! SCMA codebooks and the sparse factor graph they live on.
//!
//! Each of the `U` users owns an `R x M` complex codebook whose columns are
//! the user's `M` codewords. A codeword occupies only the `d_v` resource
//! elements assigned to that user by the factor graph; every resource element
//! is shared by exactly `d_f` users. Codeword indices and combination indices
//! are 0-based throughout.

use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while building, loading or using codebooks.
#[derive(Debug, Error)]
pub enum CodebookError {
    #[error("user count {users} does not match the {expected} distinct {dv}-subsets of {resources} resource elements; supply an explicit incidence matrix")]
    NotCanonical {
        users: usize,
        resources: usize,
        dv: usize,
        expected: usize,
    },
    #[error("incidence matrix is not a regular factor graph: {0}")]
    IrregularGraph(String),
    #[error("codewords per user must be a power of two for bit mapping, got {0}")]
    NotPowerOfTwo(usize),
    #[error("codebook entry for user {user}, codeword {codeword}, resource {resource} violates the sparsity pattern")]
    SparsityMismatch {
        user: usize,
        codeword: usize,
        resource: usize,
    },
    #[error("codeword energy for user {user}, codeword {codeword} is {energy}, expected 1")]
    BadEnergy {
        user: usize,
        codeword: usize,
        energy: f64,
    },
    #[error("user {user} has duplicate codewords {a} and {b}")]
    DuplicateCodeword { user: usize, a: usize, b: usize },
    #[error("codebook file dimensions ({0}) do not match the factor graph")]
    DimensionMismatch(String),
    #[error("bit vector length {got} does not match {expected} (= users x bits per codeword)")]
    BitLength { expected: usize, got: usize },
    #[error("failed to read codebook file: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse codebook file: {0}")]
    Parse(#[from] serde_json::Error),
}

// ---------------------------------------------------------------------------
// Factor graph
// ---------------------------------------------------------------------------

/// Bipartite incidence structure between resource elements (rows) and users
/// (columns). `incidence[r][u] = 1` iff user `u` occupies resource `r`.
///
/// Regularity is enforced on construction: every column sums to `d_v`, every
/// row to `d_f`, and columns are pairwise distinct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorGraph {
    resources: usize,
    users: usize,
    incidence: Vec<Vec<u8>>,
    /// Users sharing each resource element (the row supports).
    per_resource: Vec<Vec<usize>>,
    /// Resource elements occupied by each user (the column supports).
    per_user: Vec<Vec<usize>>,
    dv: usize,
    df: usize,
}

impl FactorGraph {
    /// Builds a graph from an explicit R x U {0,1} incidence matrix.
    pub fn from_incidence(incidence: Vec<Vec<u8>>) -> Result<Self, CodebookError> {
        let resources = incidence.len();
        if resources == 0 {
            return Err(CodebookError::IrregularGraph("no resource elements".into()));
        }
        let users = incidence[0].len();
        if users == 0 {
            return Err(CodebookError::IrregularGraph("no users".into()));
        }
        for (r, row) in incidence.iter().enumerate() {
            if row.len() != users {
                return Err(CodebookError::IrregularGraph(format!(
                    "row {r} has {} entries, expected {users}",
                    row.len()
                )));
            }
            if let Some(&bad) = row.iter().find(|&&x| x > 1) {
                return Err(CodebookError::IrregularGraph(format!(
                    "row {r} contains non-binary entry {bad}"
                )));
            }
        }

        let per_resource: Vec<Vec<usize>> = incidence
            .iter()
            .map(|row| (0..users).filter(|&u| row[u] == 1).collect())
            .collect();
        let per_user: Vec<Vec<usize>> = (0..users)
            .map(|u| (0..resources).filter(|&r| incidence[r][u] == 1).collect())
            .collect();

        let dv = per_user[0].len();
        if let Some(u) = (0..users).find(|&u| per_user[u].len() != dv) {
            return Err(CodebookError::IrregularGraph(format!(
                "user {u} occupies {} resources, user 0 occupies {dv}",
                per_user[u].len()
            )));
        }
        let df = per_resource[0].len();
        if let Some(r) = (0..resources).find(|&r| per_resource[r].len() != df) {
            return Err(CodebookError::IrregularGraph(format!(
                "resource {r} is shared by {} users, resource 0 by {df}",
                per_resource[r].len()
            )));
        }
        if dv == 0 {
            return Err(CodebookError::IrregularGraph("empty user column".into()));
        }
        for a in 0..users {
            for b in a + 1..users {
                if per_user[a] == per_user[b] {
                    return Err(CodebookError::IrregularGraph(format!(
                        "users {a} and {b} occupy identical resource sets"
                    )));
                }
            }
        }

        Ok(Self {
            resources,
            users,
            incidence,
            per_resource,
            per_user,
            dv,
            df,
        })
    }

    /// Canonical regular graph: the columns are the `d_v`-subsets of the `R`
    /// resource elements in lexicographic order. Requires `U = C(R, d_v)`
    /// (and therefore `d_f = C(R-1, d_v-1)`); other shapes must be supplied
    /// as an explicit incidence matrix.
    pub fn standard(
        resources: usize,
        users: usize,
        dv: usize,
        df: usize,
    ) -> Result<Self, CodebookError> {
        let expected = binomial(resources, dv);
        if users != expected {
            return Err(CodebookError::NotCanonical {
                users,
                resources,
                dv,
                expected,
            });
        }
        let mut incidence = vec![vec![0u8; users]; resources];
        for (u, subset) in subsets_lex(resources, dv).into_iter().enumerate() {
            for r in subset {
                incidence[r][u] = 1;
            }
        }
        let graph = Self::from_incidence(incidence)?;
        if graph.df != df {
            return Err(CodebookError::IrregularGraph(format!(
                "canonical construction yields d_f = {}, requested {df}",
                graph.df
            )));
        }
        Ok(graph)
    }

    pub fn resources(&self) -> usize {
        self.resources
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn dv(&self) -> usize {
        self.dv
    }

    pub fn df(&self) -> usize {
        self.df
    }

    pub fn incidence(&self) -> &[Vec<u8>] {
        &self.incidence
    }

    /// Users sharing resource element `r`.
    pub fn users_on_resource(&self, r: usize) -> &[usize] {
        &self.per_resource[r]
    }

    /// Resource elements occupied by user `u`.
    pub fn resources_of_user(&self, u: usize) -> &[usize] {
        &self.per_user[u]
    }

    pub fn occupies(&self, u: usize, r: usize) -> bool {
        self.incidence[r][u] == 1
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// All k-subsets of {0..n} in lexicographic order.
fn subsets_lex(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(n, k));
    let mut current = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            rec(i + 1, n, k, current, out);
            current.pop();
        }
    }
    rec(0, n, k, &mut current, &mut out);
    out
}

// ---------------------------------------------------------------------------
// Codebook
// ---------------------------------------------------------------------------

/// Per-user sparse codebooks conforming to a [`FactorGraph`].
///
/// `entry(u, m, r)` is the complex value user `u`'s codeword `m` places on
/// resource element `r`; it is zero exactly where the graph says the user is
/// absent. Every codeword has unit energy.
#[derive(Debug, Clone)]
pub struct Codebook {
    graph: FactorGraph,
    m: usize,
    /// Indexed `[user][codeword][resource]`.
    entries: Vec<Vec<Vec<Complex64>>>,
}

impl Codebook {
    /// Wraps raw entries after checking sparsity, unit energy and per-user
    /// codeword distinctness against the graph.
    pub fn new(
        graph: FactorGraph,
        entries: Vec<Vec<Vec<Complex64>>>,
    ) -> Result<Self, CodebookError> {
        if entries.len() != graph.users() {
            return Err(CodebookError::DimensionMismatch(format!(
                "{} users in entries, graph has {}",
                entries.len(),
                graph.users()
            )));
        }
        let m = entries[0].len();
        if m == 0 {
            return Err(CodebookError::DimensionMismatch("no codewords".into()));
        }
        for (u, per_user) in entries.iter().enumerate() {
            if per_user.len() != m {
                return Err(CodebookError::DimensionMismatch(format!(
                    "user {u} has {} codewords, user 0 has {m}",
                    per_user.len()
                )));
            }
            for (cw, col) in per_user.iter().enumerate() {
                if col.len() != graph.resources() {
                    return Err(CodebookError::DimensionMismatch(format!(
                        "user {u} codeword {cw} has {} entries, expected {}",
                        col.len(),
                        graph.resources()
                    )));
                }
                let mut energy = 0.0;
                for (r, &c) in col.iter().enumerate() {
                    if !graph.occupies(u, r) && c != Complex64::ZERO {
                        return Err(CodebookError::SparsityMismatch {
                            user: u,
                            codeword: cw,
                            resource: r,
                        });
                    }
                    energy += c.norm_sqr();
                }
                if (energy - 1.0).abs() > 1e-9 {
                    return Err(CodebookError::BadEnergy {
                        user: u,
                        codeword: cw,
                        energy,
                    });
                }
            }
            for a in 0..m {
                for b in a + 1..m {
                    let dist: f64 = (0..graph.resources())
                        .map(|r| (per_user[a][r] - per_user[b][r]).norm_sqr())
                        .sum();
                    if dist < 1e-18 {
                        return Err(CodebookError::DuplicateCodeword { user: u, a, b });
                    }
                }
            }
        }
        Ok(Self { graph, m, entries })
    }

    /// Deterministic default construction: codeword `m` of user `u` places
    /// `rho_u * s_m / sqrt(d_v)` on each occupied resource, where `s_m` are
    /// the M-ary PSK points `exp(j 2 pi m / M)` and `rho_u = exp(j pi u / (U M))`
    /// is a per-user rotation that separates the superimposed constellations.
    pub fn default_for(graph: &FactorGraph, m: usize) -> Result<Self, CodebookError> {
        if !m.is_power_of_two() {
            return Err(CodebookError::NotPowerOfTwo(m));
        }
        let users = graph.users();
        let scale = 1.0 / (graph.dv() as f64).sqrt();
        let entries = (0..users)
            .map(|u| {
                let rho = Complex64::from_polar(
                    1.0,
                    std::f64::consts::PI * u as f64 / (users * m) as f64,
                );
                (0..m)
                    .map(|cw| {
                        let point = Complex64::from_polar(
                            1.0,
                            2.0 * std::f64::consts::PI * cw as f64 / m as f64,
                        );
                        let value = rho * point * scale;
                        (0..graph.resources())
                            .map(|r| {
                                if graph.occupies(u, r) {
                                    value
                                } else {
                                    Complex64::ZERO
                                }
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self::new(graph.clone(), entries)
    }

    /// Loads a codebook from the JSON file format (see [`CodebookFile`]) and
    /// validates it against `graph`. `M` is taken from the file and is not
    /// required to be a power of two here; [`Codebook::bit_mapping`] flags
    /// that downstream.
    pub fn load(path: &Path, graph: &FactorGraph) -> Result<Self, CodebookError> {
        let text = std::fs::read_to_string(path)?;
        let file: CodebookFile = serde_json::from_str(&text)?;
        file.into_codebook(graph)
    }

    /// Serializes to the JSON file format.
    pub fn to_file(&self) -> CodebookFile {
        CodebookFile {
            resources: self.graph.resources(),
            users: self.graph.users(),
            m: self.m,
            incidence: self.graph.incidence().to_vec(),
            codewords: self
                .entries
                .iter()
                .map(|per_user| {
                    per_user
                        .iter()
                        .map(|col| col.iter().map(|c| [c.re, c.im]).collect())
                        .collect()
                })
                .collect(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), CodebookError> {
        let text = serde_json::to_string_pretty(&self.to_file())?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn graph(&self) -> &FactorGraph {
        &self.graph
    }

    /// Codewords per user.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Value of user `u`'s codeword `cw` on resource element `r`.
    #[inline]
    pub fn entry(&self, u: usize, cw: usize, r: usize) -> Complex64 {
        self.entries[u][cw][r]
    }

    /// Full codeword of user `u` as a length-R column.
    pub fn codeword(&self, u: usize, cw: usize) -> &[Complex64] {
        &self.entries[u][cw]
    }

    /// The bit mapping for this codebook; fails when `M` is not a power of two.
    pub fn bit_mapping(&self) -> Result<BitMapping, CodebookError> {
        BitMapping::new(self.m)
    }
}

/// On-disk codebook representation: complex entries as `[re, im]` pairs,
/// zero entries as literal `[0.0, 0.0]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodebookFile {
    #[serde(rename = "R")]
    pub resources: usize,
    #[serde(rename = "U")]
    pub users: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub incidence: Vec<Vec<u8>>,
    /// Indexed `[user][codeword][resource]`.
    pub codewords: Vec<Vec<Vec<[f64; 2]>>>,
}

impl CodebookFile {
    fn into_codebook(self, graph: &FactorGraph) -> Result<Codebook, CodebookError> {
        if self.resources != graph.resources() || self.users != graph.users() {
            return Err(CodebookError::DimensionMismatch(format!(
                "file is {}x{}, graph is {}x{}",
                self.resources,
                self.users,
                graph.resources(),
                graph.users()
            )));
        }
        if self.incidence != graph.incidence() {
            return Err(CodebookError::DimensionMismatch(
                "incidence matrix differs from the supplied graph".into(),
            ));
        }
        if self.codewords.len() != self.users
            || self.codewords.iter().any(|per_user| per_user.len() != self.m)
        {
            return Err(CodebookError::DimensionMismatch(
                "codeword array shape does not match R/U/M header".into(),
            ));
        }
        let entries = self
            .codewords
            .into_iter()
            .map(|per_user| {
                per_user
                    .into_iter()
                    .map(|col| col.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
                    .collect()
            })
            .collect();
        Codebook::new(graph.clone(), entries)
    }
}

// ---------------------------------------------------------------------------
// Bit mapping
// ---------------------------------------------------------------------------

/// Bijection between codeword indices `{0..M}` and bit tuples of length
/// `log2(M)`, big-endian within each user's group (first bit is the most
/// significant).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitMapping {
    m: usize,
    bits_per_codeword: usize,
}

impl BitMapping {
    pub fn new(m: usize) -> Result<Self, CodebookError> {
        if !m.is_power_of_two() || m < 2 {
            return Err(CodebookError::NotPowerOfTwo(m));
        }
        Ok(Self {
            m,
            bits_per_codeword: m.trailing_zeros() as usize,
        })
    }

    pub fn bits_per_codeword(&self) -> usize {
        self.bits_per_codeword
    }

    pub fn index_from_bits(&self, bits: &[u8]) -> usize {
        debug_assert_eq!(bits.len(), self.bits_per_codeword);
        bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn bits_from_index(&self, index: usize) -> Vec<u8> {
        debug_assert!(index < self.m);
        (0..self.bits_per_codeword)
            .map(|i| ((index >> (self.bits_per_codeword - 1 - i)) & 1) as u8)
            .collect()
    }
}

/// Splits a frame's bit vector into per-user codeword indices. User `u`
/// consumes bits `[u*log2(M) .. (u+1)*log2(M))`.
pub fn bits_to_indices(bits: &[u8], codebook: &Codebook) -> Result<Vec<usize>, CodebookError> {
    let mapping = codebook.bit_mapping()?;
    let per_user = mapping.bits_per_codeword();
    let expected = codebook.graph().users() * per_user;
    if bits.len() != expected {
        return Err(CodebookError::BitLength {
            expected,
            got: bits.len(),
        });
    }
    Ok(bits
        .chunks(per_user)
        .map(|chunk| mapping.index_from_bits(chunk))
        .collect())
}

/// Inverse of [`bits_to_indices`].
pub fn indices_to_bits(indices: &[usize], codebook: &Codebook) -> Result<Vec<u8>, CodebookError> {
    let mapping = codebook.bit_mapping()?;
    let mut bits = Vec::with_capacity(indices.len() * mapping.bits_per_codeword());
    for &idx in indices {
        bits.extend(mapping.bits_from_index(idx));
    }
    Ok(bits)
}

impl fmt::Display for FactorGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} resources x {} users (d_v={}, d_f={})",
            self.resources, self.users, self.dv, self.df
        )?;
        for row in &self.incidence {
            for &x in row {
                write!(f, "{x} ")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
