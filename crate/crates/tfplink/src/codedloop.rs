//! LDPC decoding and iterative (turbo) detection/decoding.
//!
//! The decoder is a row-layered sum-product with the exact tanh-domain
//! check update; min-sum sits behind a config flag because it shifts the
//! code thresholds. Parity-check matrices load from alist text files; a
//! small bundled rate-4/5 code covers desk-scale coded runs without the
//! 64800-bit standard matrix.

use crate::error::{Error, Result};
use crate::isidet::{bcjr_pam, Boundary, ShortenerSolution};
use crate::sigkit::{derive_rng, Constellation, SeedDomain};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

/// Sparse binary parity-check matrix in adjacency form.
#[derive(Debug, Clone, PartialEq)]
pub struct ParityCheck {
    n: usize,
    m: usize,
    check_neighbors: Vec<Vec<u32>>,
    var_neighbors: Vec<Vec<u32>>,
}

impl ParityCheck {
    pub fn n_vars(&self) -> usize {
        self.n
    }

    pub fn n_checks(&self) -> usize {
        self.m
    }

    /// Code rate under the full-rank assumption: 1 - rows/cols.
    pub fn rate(&self) -> f64 {
        1.0 - self.m as f64 / self.n as f64
    }

    pub fn check_neighbors(&self, check: usize) -> &[u32] {
        &self.check_neighbors[check]
    }

    pub fn from_adjacency(n: usize, check_neighbors: Vec<Vec<u32>>) -> Result<Self> {
        let m = check_neighbors.len();
        let mut var_neighbors = vec![Vec::new(); n];
        for (c, row) in check_neighbors.iter().enumerate() {
            for &v in row {
                if v as usize >= n {
                    return Err(Error::Alist(format!(
                        "check {c} references variable {v} out of {n}"
                    )));
                }
                var_neighbors[v as usize].push(c as u32);
            }
        }
        Ok(Self {
            n,
            m,
            check_neighbors,
            var_neighbors,
        })
    }

    /// Parse the alist text format: `N M`, `max_dv max_dc`, the per-node
    /// degree lists, then 1-based neighbor rows padded with zeros to the
    /// maximum degree.
    pub fn from_alist(text: &str) -> Result<Self> {
        let mut numbers = text.split_whitespace().map(|t| {
            t.parse::<i64>()
                .map_err(|_| Error::Alist(format!("not an integer: {t:?}")))
        });
        let mut next = |what: &str| -> Result<i64> {
            numbers
                .next()
                .transpose()?
                .ok_or_else(|| Error::Alist(format!("unexpected end of file reading {what}")))
        };
        let n = next("N")? as usize;
        let m = next("M")? as usize;
        if n == 0 || m == 0 {
            return Err(Error::Alist("empty code".into()));
        }
        let max_dv = next("max variable degree")? as usize;
        let max_dc = next("max check degree")? as usize;
        let dv: Vec<usize> = (0..n)
            .map(|_| next("variable degree").map(|v| v as usize))
            .collect::<Result<_>>()?;
        let dc: Vec<usize> = (0..m)
            .map(|_| next("check degree").map(|v| v as usize))
            .collect::<Result<_>>()?;
        let mut read_rows = |count: usize,
                             width: usize,
                             degrees: &[usize],
                             what: &str|
         -> Result<Vec<Vec<u32>>> {
            (0..count)
                .map(|i| {
                    let mut row = Vec::with_capacity(degrees[i]);
                    for _ in 0..width {
                        let v = next(what)?;
                        if v > 0 {
                            row.push((v - 1) as u32);
                        }
                    }
                    if row.len() != degrees[i] {
                        return Err(Error::Alist(format!(
                            "{what} {i}: {} entries vs declared degree {}",
                            row.len(),
                            degrees[i]
                        )));
                    }
                    Ok(row)
                })
                .collect()
        };
        let var_lists = read_rows(n, max_dv, &dv, "variable row")?;
        let check_lists = read_rows(m, max_dc, &dc, "check row")?;
        let pc = Self::from_adjacency(n, check_lists)?;
        // cross-validate the two adjacency views
        for (v, expected) in var_lists.iter().enumerate() {
            let mut got = pc.var_neighbors[v].clone();
            let mut exp = expected.clone();
            got.sort_unstable();
            exp.sort_unstable();
            if got != exp {
                return Err(Error::Alist(format!(
                    "inconsistent adjacency at variable {v}"
                )));
            }
        }
        Ok(pc)
    }

    /// Serialize to alist text (rows padded with zeros).
    pub fn to_alist(&self) -> String {
        use std::fmt::Write;
        fn degrees(lists: &[Vec<u32>]) -> String {
            lists
                .iter()
                .map(|l| l.len().to_string())
                .collect::<Vec<_>>()
                .join(" ")
        }
        fn write_rows(out: &mut String, lists: &[Vec<u32>], width: usize) {
            for row in lists {
                let mut items: Vec<String> = row.iter().map(|v| (v + 1).to_string()).collect();
                while items.len() < width {
                    items.push("0".into());
                }
                writeln!(out, "{}", items.join(" ")).unwrap();
            }
        }
        let max_dv = self.var_neighbors.iter().map(Vec::len).max().unwrap_or(0);
        let max_dc = self.check_neighbors.iter().map(Vec::len).max().unwrap_or(0);
        let mut out = String::new();
        writeln!(out, "{} {}", self.n, self.m).unwrap();
        writeln!(out, "{max_dv} {max_dc}").unwrap();
        writeln!(out, "{}", degrees(&self.var_neighbors)).unwrap();
        writeln!(out, "{}", degrees(&self.check_neighbors)).unwrap();
        write_rows(&mut out, &self.var_neighbors, max_dv);
        write_rows(&mut out, &self.check_neighbors, max_dc);
        out
    }

    /// Regular Gallager-ensemble code: every variable in `dv` checks,
    /// every check over `dc` variables, no parallel edges (repaired by
    /// local socket swaps). Deterministic for a given seed.
    pub fn random_regular(n: usize, dv: usize, dc: usize, seed: u64) -> Result<Self> {
        if n * dv % dc != 0 {
            return Err(Error::InvalidParameter(format!(
                "socket mismatch: {n} variables x degree {dv} not divisible by {dc}"
            )));
        }
        let m = n * dv / dc;
        let mut rng = derive_rng(seed, SeedDomain::Interleaver, 777);
        let mut sockets: Vec<u32> = (0..n as u32)
            .flat_map(|v| std::iter::repeat(v).take(dv))
            .collect();
        sockets.shuffle(&mut rng);
        let row_of = |i: usize| i / dc;
        let has_dup = |sockets: &[u32], i: usize| -> bool {
            let c = row_of(i);
            let row = &sockets[c * dc..(c + 1) * dc];
            row.iter().filter(|&&v| v == sockets[i]).count() > 1
        };
        // swap-repair parallel edges
        for _round in 0..10_000 {
            let mut bad = None;
            for i in 0..sockets.len() {
                if has_dup(&sockets, i) {
                    bad = Some(i);
                    break;
                }
            }
            let Some(i) = bad else {
                let rows: Vec<Vec<u32>> = (0..m)
                    .map(|c| sockets[c * dc..(c + 1) * dc].to_vec())
                    .collect();
                return Self::from_adjacency(n, rows);
            };
            // draw swap partners until both rows stay duplicate-free
            for _try in 0..1000 {
                let j = rng.random_range(0..sockets.len());
                if row_of(j) == row_of(i) {
                    continue;
                }
                sockets.swap(i, j);
                if !has_dup(&sockets, i) && !has_dup(&sockets, j) {
                    break;
                }
                sockets.swap(i, j); // undo and retry
            }
        }
        Err(Error::InvalidParameter(
            "could not repair the regular code into a simple graph".into(),
        ))
    }

    /// The (7,4) Hamming code written as a parity-check matrix.
    pub fn hamming74() -> Self {
        let rows = vec![vec![0, 2, 4, 6], vec![1, 2, 5, 6], vec![3, 4, 5, 6]];
        Self::from_adjacency(7, rows).unwrap()
    }

    /// Bundled rate-4/5 toy code (n = 5000, regular (3,15)) for desk-scale
    /// coded runs.
    pub fn bundled_toy() -> Self {
        Self::from_alist(include_str!("../assets/ldpc_toy_r45.alist"))
            .expect("bundled alist is valid")
    }

    /// True when `bits` satisfies every parity check.
    pub fn syndrome_ok(&self, bits: &[u8]) -> bool {
        self.check_neighbors
            .iter()
            .all(|row| row.iter().fold(0u8, |acc, &v| acc ^ bits[v as usize]) == 0)
    }
}

/// Systematic encoder derived from the parity-check matrix by Gaussian
/// elimination over GF(2). Codeword bits at pivot columns are parity;
/// the remaining columns carry information bits.
#[derive(Debug, Clone)]
pub struct Encoder {
    n: usize,
    info_cols: Vec<u32>,
    parity_cols: Vec<u32>,
    /// One mask per parity bit, over the info-bit vector.
    parity_masks: Vec<Vec<u64>>,
}

impl Encoder {
    pub fn k(&self) -> usize {
        self.info_cols.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.k() {
            return Err(Error::LengthMismatch {
                left: info.len(),
                right: self.k(),
            });
        }
        let words = info.len().div_ceil(64);
        let mut packed = vec![0u64; words];
        for (i, &b) in info.iter().enumerate() {
            if b & 1 == 1 {
                packed[i / 64] |= 1 << (i % 64);
            }
        }
        let mut codeword = vec![0u8; self.n];
        for (i, &col) in self.info_cols.iter().enumerate() {
            codeword[col as usize] = info[i] & 1;
        }
        for (mask, &col) in self.parity_masks.iter().zip(&self.parity_cols) {
            let mut acc = 0u64;
            for (m, p) in mask.iter().zip(&packed) {
                acc ^= m & p;
            }
            codeword[col as usize] = (acc.count_ones() & 1) as u8;
        }
        Ok(codeword)
    }
}

impl ParityCheck {
    /// Build an encoder by row-reducing H. Redundant (dependent) checks
    /// are dropped; the info length is n minus the matrix rank.
    pub fn encoder(&self) -> Result<Encoder> {
        let words = self.n.div_ceil(64);
        let mut rows: Vec<Vec<u64>> = self
            .check_neighbors
            .iter()
            .map(|neigh| {
                let mut row = vec![0u64; words];
                for &v in neigh {
                    row[v as usize / 64] |= 1 << (v as usize % 64);
                }
                row
            })
            .collect();
        let mut pivot_of_row: Vec<Option<u32>> = vec![None; rows.len()];
        let mut is_pivot_col = vec![false; self.n];
        let mut rank = 0usize;
        for r in 0..rows.len() {
            // find first set bit not already a pivot column
            let mut pivot = None;
            for col in 0..self.n {
                if !is_pivot_col[col] && rows[r][col / 64] >> (col % 64) & 1 == 1 {
                    pivot = Some(col);
                    break;
                }
            }
            let Some(p) = pivot else { continue }; // dependent row
            is_pivot_col[p] = true;
            pivot_of_row[r] = Some(p as u32);
            rank += 1;
            let pivot_row = rows[r].clone();
            for (rr, row) in rows.iter_mut().enumerate() {
                if rr != r && row[p / 64] >> (p % 64) & 1 == 1 {
                    for (a, b) in row.iter_mut().zip(&pivot_row) {
                        *a ^= b;
                    }
                }
            }
        }
        let _ = rank;
        let info_cols: Vec<u32> = (0..self.n as u32)
            .filter(|&c| !is_pivot_col[c as usize])
            .collect();
        let col_to_info: std::collections::HashMap<u32, usize> = info_cols
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i))
            .collect();
        let k = info_cols.len();
        let mask_words = k.div_ceil(64).max(1);
        let mut parity_cols = Vec::new();
        let mut parity_masks = Vec::new();
        for (r, pivot) in pivot_of_row.iter().enumerate() {
            let Some(p) = pivot else { continue };
            let mut mask = vec![0u64; mask_words];
            for col in 0..self.n {
                if col as u32 != *p && rows[r][col / 64] >> (col % 64) & 1 == 1 {
                    let idx = col_to_info[&(col as u32)];
                    mask[idx / 64] |= 1 << (idx % 64);
                }
            }
            parity_cols.push(*p);
            parity_masks.push(mask);
        }
        Ok(Encoder {
            n: self.n,
            info_cols,
            parity_cols,
            parity_masks,
        })
    }
}

/// Check-node update rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CheckRule {
    #[default]
    SumProduct,
    MinSum,
}

#[derive(Debug, Clone)]
pub struct DecodeOutcome {
    pub hard: Vec<u8>,
    /// Extrinsic LLRs (posterior minus channel input).
    pub extrinsic: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

const LLR_CLAMP: f64 = 30.0;

/// Row-layered belief-propagation decoding.
///
/// LLR convention: positive favors bit 0. Non-convergence is a flagged
/// outcome, not an error.
pub fn ldpc_decode(
    llrs: &[f64],
    h: &ParityCheck,
    max_iterations: usize,
    rule: CheckRule,
) -> Result<DecodeOutcome> {
    if llrs.len() != h.n {
        return Err(Error::LengthMismatch {
            left: llrs.len(),
            right: h.n,
        });
    }
    let mut q: Vec<f64> = llrs
        .iter()
        .map(|&l| l.clamp(-LLR_CLAMP, LLR_CLAMP))
        .collect();
    let mut r: Vec<Vec<f64>> = h
        .check_neighbors
        .iter()
        .map(|row| vec![0.0; row.len()])
        .collect();
    let hard = |q: &[f64]| -> Vec<u8> { q.iter().map(|&v| (v < 0.0) as u8).collect() };

    let mut iterations = 0;
    let mut converged = h.syndrome_ok(&hard(&q));
    let mut t: Vec<f64> = Vec::new();
    while !converged && iterations < max_iterations {
        iterations += 1;
        for (c, row) in h.check_neighbors.iter().enumerate() {
            let deg = row.len();
            t.clear();
            for (j, &v) in row.iter().enumerate() {
                t.push((q[v as usize] - r[c][j]).clamp(-LLR_CLAMP, LLR_CLAMP));
            }
            match rule {
                CheckRule::SumProduct => {
                    // leave-one-out products of tanh(t/2), forward/backward
                    let th: Vec<f64> = t.iter().map(|&v| (v / 2.0).tanh()).collect();
                    let mut fwd = vec![1.0; deg + 1];
                    for j in 0..deg {
                        fwd[j + 1] = fwd[j] * th[j];
                    }
                    let mut bwd = 1.0;
                    for j in (0..deg).rev() {
                        let excl = fwd[j] * bwd;
                        bwd *= th[j];
                        let clipped = excl.clamp(-(1.0 - 1e-15), 1.0 - 1e-15);
                        let msg = 2.0 * clipped.atanh();
                        let v = row[j] as usize;
                        q[v] = t[j] + msg;
                        r[c][j] = msg;
                    }
                }
                CheckRule::MinSum => {
                    let mut sign = 1.0f64;
                    let mut min1 = f64::INFINITY;
                    let mut min2 = f64::INFINITY;
                    let mut arg = 0usize;
                    for (j, &v) in t.iter().enumerate() {
                        sign *= if v < 0.0 { -1.0 } else { 1.0 };
                        let a = v.abs();
                        if a < min1 {
                            min2 = min1;
                            min1 = a;
                            arg = j;
                        } else if a < min2 {
                            min2 = a;
                        }
                    }
                    for j in 0..deg {
                        let mag = if j == arg { min2 } else { min1 };
                        let own_sign = if t[j] < 0.0 { -1.0 } else { 1.0 };
                        let msg = sign * own_sign * mag;
                        let v = row[j] as usize;
                        q[v] = t[j] + msg;
                        r[c][j] = msg;
                    }
                }
            }
        }
        converged = h.syndrome_ok(&hard(&q));
    }
    let decisions = hard(&q);
    let extrinsic: Vec<f64> = q.iter().zip(llrs).map(|(post, ch)| post - ch).collect();
    Ok(DecodeOutcome {
        hard: decisions,
        extrinsic,
        converged,
        iterations,
    })
}

/// Error fraction with exact error count.
pub fn measure_ber(decoded: &[u8], reference: &[u8]) -> Result<(f64, usize)> {
    if decoded.len() != reference.len() {
        return Err(Error::LengthMismatch {
            left: decoded.len(),
            right: reference.len(),
        });
    }
    let errors = decoded
        .iter()
        .zip(reference)
        .filter(|(a, b)| a != b)
        .count();
    Ok((errors as f64 / decoded.len().max(1) as f64, decoded.len()))
}

/// Seeded uniform random bit interleaver between code and modulation.
#[derive(Debug, Clone)]
pub struct Interleaver {
    perm: Vec<u32>,
    inv: Vec<u32>,
}

impl Interleaver {
    pub fn new(len: usize, seed: u64) -> Self {
        let mut perm: Vec<u32> = (0..len as u32).collect();
        let mut rng = derive_rng(seed, SeedDomain::Interleaver, 0);
        perm.shuffle(&mut rng);
        let mut inv = vec![0u32; len];
        for (i, &p) in perm.iter().enumerate() {
            inv[p as usize] = i as u32;
        }
        Self { perm, inv }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// Channel position `i` carries codeword bit `perm[i]`.
    pub fn scatter<T: Copy>(&self, codeword: &[T]) -> Vec<T> {
        self.perm.iter().map(|&p| codeword[p as usize]).collect()
    }

    /// Codeword bit index carried at a channel position.
    pub fn codeword_index(&self, channel_pos: usize) -> usize {
        self.perm[channel_pos] as usize
    }

    /// Channel position carrying a codeword bit.
    pub fn channel_index(&self, codeword_pos: usize) -> usize {
        self.inv[codeword_pos] as usize
    }
}

#[derive(Debug, Clone)]
pub struct TurboConfig {
    pub max_iterations: usize,
    /// Stop on zero syndrome.
    pub early_stop: bool,
    /// LDPC iterations per detector pass.
    pub inner_iterations: usize,
    pub check_rule: CheckRule,
}

impl Default for TurboConfig {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            early_stop: true,
            inner_iterations: 20,
            check_rule: CheckRule::SumProduct,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TurboOutcome {
    pub bits: Vec<u8>,
    pub iterations: usize,
    pub converged: bool,
    /// Coded BER after each turbo iteration (filled when `reference` is
    /// supplied).
    pub ber_trace: Vec<f64>,
}

#[inline]
fn ln_sigmoid(l: f64) -> f64 {
    // ln(1/(1+e^{-l}))
    if l > 30.0 {
        0.0
    } else {
        -(-l).exp().ln_1p()
    }
}

fn normalize_log_row(mut row: Vec<f64>) -> Vec<f64> {
    let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
    row
}

/// Map channel-ordered bit LLRs to per-quadrature PAM symbol priors.
/// Symbol k uses bits [k q, (k+1) q): first half I label, second half Q,
/// MSB first, matching the Gray mapper.
fn bit_llrs_to_priors(
    llrs: &[f64],
    c: &Constellation,
    n_symbols: usize,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let q = c.bits_per_symbol;
    let qb = c.bits_per_pam();
    let m = c.pam_size();
    let mut pi = Vec::with_capacity(n_symbols);
    let mut pq = Vec::with_capacity(n_symbols);
    for k in 0..n_symbols {
        let base = k * q;
        let mut row_i = vec![0.0; m];
        let mut row_q = vec![0.0; m];
        for lvl in 0..m {
            let label = c.pam_label(lvl);
            let mut li = 0.0;
            let mut lq = 0.0;
            for b in 0..qb {
                let bit = (label >> (qb - 1 - b)) & 1;
                let l_i = llrs[base + b];
                let l_q = llrs[base + qb + b];
                li += ln_sigmoid(if bit == 0 { l_i } else { -l_i });
                lq += ln_sigmoid(if bit == 0 { l_q } else { -l_q });
            }
            row_i[lvl] = li;
            row_q[lvl] = lq;
        }
        pi.push(normalize_log_row(row_i));
        pq.push(normalize_log_row(row_q));
    }
    (pi, pq)
}

/// Marginal prior of one bit position implied by a level-prior row.
fn bit_marginal(prior_row: &[f64], b: usize, qb: usize, c: &Constellation, bit: u32) -> f64 {
    prior_row
        .iter()
        .enumerate()
        .filter(|(lvl, _)| (c.pam_label(*lvl) >> (qb - 1 - b)) & 1 == bit)
        .map(|(_, &p)| p)
        .sum()
}

/// Extrinsic bit LLRs from per-quadrature detector posteriors: divide out
/// the full symbol prior, then reattach the other bit positions' priors.
fn posteriors_to_bit_llrs(
    app_i: &[Vec<f64>],
    app_q: &[Vec<f64>],
    priors: Option<(&[Vec<f64>], &[Vec<f64>])>,
    c: &Constellation,
) -> Vec<f64> {
    let qb = c.bits_per_pam();
    let m = c.pam_size();
    let n_symbols = app_i.len();
    let mut llrs = vec![0.0; n_symbols * c.bits_per_symbol];
    for k in 0..n_symbols {
        for (quad, app) in [(0usize, app_i), (1, app_q)] {
            let prior_row: Option<&Vec<f64>> =
                priors.map(|(pi, pq)| if quad == 0 { &pi[k] } else { &pq[k] });
            for b in 0..qb {
                let mut num = 0.0;
                let mut den = 0.0;
                for lvl in 0..m {
                    let label = c.pam_label(lvl);
                    let bit = (label >> (qb - 1 - b)) & 1;
                    let mut weight = app[k][lvl].max(1e-300);
                    if let Some(row) = prior_row {
                        // remove only this bit's own prior: divide the
                        // posterior by the bit marginal implied by the row
                        let marg = bit_marginal(row, b, qb, c, bit).max(1e-300);
                        weight /= marg;
                    }
                    if bit == 0 {
                        num += weight;
                    } else {
                        den += weight;
                    }
                }
                llrs[k * c.bits_per_symbol + quad * qb + b] = (num.max(1e-300) / den.max(1e-300))
                    .ln()
                    .clamp(-LLR_CLAMP, LLR_CLAMP);
            }
        }
    }
    llrs
}

/// Iterative detection and decoding of one codeword.
///
/// `y` holds the MF-domain observations covering exactly the codeword's
/// symbols; `known_prefix` optionally pins the PAM level indices (I, Q) of
/// the symbols right before the block. `reference` (codeword bits) enables
/// the per-iteration BER trace.
#[allow(clippy::too_many_arguments)]
pub fn turbo_detect_decode(
    y: &[Complex64],
    s: &ShortenerSolution,
    c: &Constellation,
    h: &ParityCheck,
    interleaver: &Interleaver,
    cfg: &TurboConfig,
    known_prefix: Option<(&[usize], &[usize])>,
    reference: Option<&[u8]>,
) -> Result<TurboOutcome> {
    let q = c.bits_per_symbol;
    let n = h.n_vars();
    if n % q != 0 || y.len() != n / q {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: n / q,
        });
    }
    if interleaver.len() != n {
        return Err(Error::LengthMismatch {
            left: interleaver.len(),
            right: n,
        });
    }
    let n_symbols = y.len();
    let z = s.filter_observations(y);
    let zi: Vec<f64> = z.iter().map(|v| v.re).collect();
    let zq: Vec<f64> = z.iter().map(|v| v.im).collect();

    let mut dec_extrinsic = vec![0.0; n]; // codeword order
    let mut outcome_bits = vec![0u8; n];
    let mut converged = false;
    let mut iterations = 0;
    let mut ber_trace = Vec::new();

    for iter in 0..cfg.max_iterations {
        iterations = iter + 1;
        let priors = if iter == 0 {
            None
        } else {
            let chan_llrs: Vec<f64> = (0..n)
                .map(|i| dec_extrinsic[interleaver.codeword_index(i)])
                .collect();
            Some(bit_llrs_to_priors(&chan_llrs, c, n_symbols))
        };
        let (pi, pq) = match &priors {
            Some((pi, pq)) => (Some(pi.as_slice()), Some(pq.as_slice())),
            None => (None, None),
        };
        let boundary_i = known_prefix
            .map(|(i, _)| Boundary::Known(i))
            .unwrap_or(Boundary::ZeroHistory);
        let boundary_q = known_prefix
            .map(|(_, qv)| Boundary::Known(qv))
            .unwrap_or(Boundary::ZeroHistory);
        let post_i = bcjr_pam(&zi, &s.target, &c.pam_levels, pi, boundary_i)?;
        let post_q = bcjr_pam(&zq, &s.target, &c.pam_levels, pq, boundary_q)?;
        let det_llrs = posteriors_to_bit_llrs(
            &post_i.app,
            &post_q.app,
            priors.as_ref().map(|(a, b)| (a.as_slice(), b.as_slice())),
            c,
        );
        let code_llrs: Vec<f64> = (0..n)
            .map(|cw| det_llrs[interleaver.channel_index(cw)])
            .collect();
        let dec = ldpc_decode(&code_llrs, h, cfg.inner_iterations, cfg.check_rule)?;
        outcome_bits = dec.hard;
        dec_extrinsic = dec.extrinsic;
        if let Some(r) = reference {
            ber_trace.push(measure_ber(&outcome_bits, r)?.0);
        }
        if dec.converged {
            converged = true;
            if cfg.early_stop {
                break;
            }
        }
    }
    Ok(TurboOutcome {
        bits: outcome_bits,
        iterations,
        converged,
        ber_trace,
    })
}
