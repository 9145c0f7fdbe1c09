//! Per-quadrature BCJR MAP symbol detection on PAM trellises.
//!
//! Square constellations split into independent I and Q PAM components, so
//! detection runs two forward-backward recursions on trellises with
//! (sqrt M)^{L_r} states instead of one with M^{L_r}. All recursions are in
//! the log domain with the exact Jacobian (max-star) update; long blocks
//! would underflow linear-domain metrics.

use super::ShortenerSolution;
use crate::dsp::max_star;
use crate::error::{Error, Result};
use crate::sigkit::Constellation;
use num_complex::Complex64;

/// Boundary handling for one detection block.
#[derive(Debug, Clone, Copy)]
pub enum Boundary<'a> {
    /// Symbols before the block are zero (no transmission).
    ZeroHistory,
    /// The last L_r symbols before the block are known PAM level indices,
    /// ordered oldest first.
    Known(&'a [usize]),
}

/// Posteriors for one quadrature.
#[derive(Debug, Clone)]
pub struct QuadPosteriors {
    /// `app[k][level]`: per-symbol a-posteriori probabilities, rows sum to 1.
    pub app: Vec<Vec<f64>>,
    /// ln sum_x q(y|x) P(x), same unnormalized convention as
    /// [`eval_aux_loglik`](super::eval_aux_loglik).
    pub log_qp: f64,
}

/// Joint result over both quadratures.
#[derive(Debug, Clone)]
pub struct TrellisPosteriors {
    pub i: QuadPosteriors,
    pub q: QuadPosteriors,
    /// Total ln q_p(y): sum of the per-quadrature values.
    pub log_qp: f64,
}

/// Optional per-symbol priors, one PMF row per symbol per quadrature.
#[derive(Debug, Clone)]
pub struct TrellisPriors {
    pub i: Vec<Vec<f64>>,
    pub q: Vec<Vec<f64>>,
}

struct Trellis<'a> {
    levels: &'a [f64],
    target: &'a [f64],
    memory: usize,
    n_states: usize,
}

impl<'a> Trellis<'a> {
    fn new(levels: &'a [f64], target: &'a [f64], memory: usize) -> Self {
        let n_states = levels.len().pow(memory as u32);
        Self {
            levels,
            target,
            memory,
            n_states,
        }
    }

    #[inline]
    fn next_state(&self, state: usize, symbol: usize) -> usize {
        if self.memory == 0 {
            0
        } else {
            // digit 0 holds the newest symbol; the oldest digit falls off
            (state % (self.n_states / self.levels.len())) * self.levels.len() + symbol
        }
    }

    /// History amplitude of the symbol transmitted `i` steps before time
    /// `k`, read from the state digits; zero before the block under
    /// ZeroHistory boundary.
    #[inline]
    fn history_amplitude(&self, state: usize, i: usize, k: usize, zero_boundary: bool) -> f64 {
        if zero_boundary && i > k {
            return 0.0;
        }
        let m = self.levels.len();
        let digit = (state / m.pow((i - 1) as u32)) % m;
        self.levels[digit]
    }

    /// Ungerboeck branch metric: 2 z_k a - g^r_0 a^2 - 2 a sum g^r_i hist.
    #[inline]
    fn branch_metric(
        &self,
        z_k: f64,
        state: usize,
        symbol: usize,
        k: usize,
        zero_boundary: bool,
    ) -> f64 {
        let a = self.levels[symbol];
        let mut cross = 0.0;
        for i in 1..=self.memory {
            cross += self.target[i] * self.history_amplitude(state, i, k, zero_boundary);
        }
        2.0 * z_k * a - self.target[0] * a * a - 2.0 * a * cross
    }
}

/// Forward-backward MAP detection of one PAM quadrature.
///
/// `z` holds the prefiltered observations, `target` the g^r taps (lag
/// 0..=L_r), `levels` the PAM alphabet. Priors default to uniform
/// (i.u.d. symbols).
pub fn bcjr_pam(
    z: &[f64],
    target: &[f64],
    levels: &[f64],
    priors: Option<&[Vec<f64>]>,
    boundary: Boundary<'_>,
) -> Result<QuadPosteriors> {
    let k_len = z.len();
    let m = levels.len();
    let memory = target.len() - 1;
    let trellis = Trellis::new(levels, target, memory);
    let n_states = trellis.n_states;

    if let Some(p) = priors {
        if p.len() != k_len {
            return Err(Error::LengthMismatch {
                left: p.len(),
                right: k_len,
            });
        }
        for row in p {
            if row.len() != m {
                return Err(Error::LengthMismatch {
                    left: row.len(),
                    right: m,
                });
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidParameter(format!(
                    "prior row sums to {sum}, expected 1"
                )));
            }
        }
    }

    let ln_prior = |k: usize, a: usize| -> f64 {
        match priors {
            Some(p) => p[k][a].max(1e-300).ln(),
            None => -(m as f64).ln(),
        }
    };

    let zero_boundary = matches!(boundary, Boundary::ZeroHistory);
    let mut alpha = vec![f64::NEG_INFINITY; n_states];
    match boundary {
        Boundary::ZeroHistory => {
            // single virtual all-pad state; pad digits read as amplitude 0
            alpha[0] = 0.0;
        }
        Boundary::Known(prefix) => {
            if prefix.len() < memory {
                return Err(Error::InvalidParameter(format!(
                    "known boundary needs at least {memory} symbols, got {}",
                    prefix.len()
                )));
            }
            let mut state = 0;
            for &idx in &prefix[prefix.len() - memory..] {
                if idx >= m {
                    return Err(Error::InvalidParameter(format!(
                        "boundary level index {idx} out of alphabet"
                    )));
                }
                state = trellis.next_state(state, idx);
            }
            alpha[state] = 0.0;
        }
    }

    // forward recursion, storing alpha at every step for the APP pass
    let mut alphas = Vec::with_capacity(k_len + 1);
    alphas.push(alpha.clone());
    let mut next = vec![f64::NEG_INFINITY; n_states];
    for k in 0..k_len {
        next.iter_mut().for_each(|v| *v = f64::NEG_INFINITY);
        for (state, &a_val) in alpha.iter().enumerate() {
            if a_val == f64::NEG_INFINITY {
                continue;
            }
            for sym in 0..m {
                let metric = trellis.branch_metric(z[k], state, sym, k, zero_boundary)
                    + ln_prior(k, sym);
                let ns = trellis.next_state(state, sym);
                next[ns] = max_star(next[ns], a_val + metric);
            }
        }
        std::mem::swap(&mut alpha, &mut next);
        alphas.push(alpha.clone());
    }

    let log_qp = alpha
        .iter()
        .fold(f64::NEG_INFINITY, |acc, &v| max_star(acc, v));

    // backward recursion with on-the-fly APP accumulation
    let mut beta = vec![0.0; n_states];
    let mut beta_next = vec![f64::NEG_INFINITY; n_states];
    let mut app = vec![vec![0.0; m]; k_len];
    for k in (0..k_len).rev() {
        let mut sym_acc = vec![f64::NEG_INFINITY; m];
        beta_next.iter_mut().for_each(|v| *v = f64::NEG_INFINITY);
        let alpha_k = &alphas[k];
        for (state, &a_val) in alpha_k.iter().enumerate() {
            // beta recursion must cover all states, APP only reachable ones
            for sym in 0..m {
                let metric = trellis.branch_metric(z[k], state, sym, k, zero_boundary)
                    + ln_prior(k, sym);
                let ns = trellis.next_state(state, sym);
                let b = beta[ns];
                beta_next[state] = max_star(beta_next[state], metric + b);
                if a_val != f64::NEG_INFINITY && b != f64::NEG_INFINITY {
                    sym_acc[sym] = max_star(sym_acc[sym], a_val + metric + b);
                }
            }
        }
        let total = sym_acc
            .iter()
            .fold(f64::NEG_INFINITY, |acc, &v| max_star(acc, v));
        for sym in 0..m {
            app[k][sym] = (sym_acc[sym] - total).exp();
        }
        // exact normalization of the probability row
        let row_sum: f64 = app[k].iter().sum();
        for v in app[k].iter_mut() {
            *v /= row_sum;
        }
        std::mem::swap(&mut beta, &mut beta_next);
    }

    Ok(QuadPosteriors { app, log_qp })
}

/// Sum of trellis branch metrics along one symbol path (no priors). By
/// the Ungerboeck factorization this equals the total sequence metric of
/// [`pam_metric`](super::pam_metric), which every change to the branch
/// decomposition must preserve.
pub fn path_metric(
    z: &[f64],
    target: &[f64],
    levels: &[f64],
    path: &[usize],
    boundary: Boundary<'_>,
) -> f64 {
    let memory = target.len() - 1;
    let trellis = Trellis::new(levels, target, memory);
    let zero_boundary = matches!(boundary, Boundary::ZeroHistory);
    let mut state = 0usize;
    if let Boundary::Known(prefix) = boundary {
        for &idx in &prefix[prefix.len().saturating_sub(memory)..] {
            state = trellis.next_state(state, idx);
        }
    }
    let mut total = 0.0;
    for (k, &sym) in path.iter().enumerate() {
        total += trellis.branch_metric(z[k], state, sym, k, zero_boundary);
        state = trellis.next_state(state, sym);
    }
    total
}

/// MAP detection of a complex observation block: prefilters with the
/// channel shortener, splits into quadratures, and runs two independent
/// PAM recursions. `x_k = 0` is assumed before the block.
pub fn bcjr_detect(
    y: &[Complex64],
    s: &ShortenerSolution,
    c: &Constellation,
    priors: Option<&TrellisPriors>,
) -> Result<TrellisPosteriors> {
    let z = s.filter_observations(y);
    let zi: Vec<f64> = z.iter().map(|v| v.re).collect();
    let zq: Vec<f64> = z.iter().map(|v| v.im).collect();
    let i = bcjr_pam(
        &zi,
        &s.target,
        &c.pam_levels,
        priors.map(|p| p.i.as_slice()),
        Boundary::ZeroHistory,
    )?;
    let q = bcjr_pam(
        &zq,
        &s.target,
        &c.pam_levels,
        priors.map(|p| p.q.as_slice()),
        Boundary::ZeroHistory,
    )?;
    let log_qp = i.log_qp + q.log_qp;
    Ok(TrellisPosteriors { i, q, log_qp })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isidet::{channel_shorten, eval_aux_loglik, UngerboeckModel};
    use crate::sigkit::{derive_rng, make_constellation, ModulationFormat, SeedDomain};
    use rand::Rng;

    fn enumeration_oracle(
        y: &[Complex64],
        s: &ShortenerSolution,
        c: &Constellation,
    ) -> (Vec<Vec<f64>>, f64) {
        // brute force over the full complex alphabet with i.u.d. priors
        let k = y.len();
        let m = c.size();
        let ln_p = -(m as f64).ln();
        let mut log_qp = f64::NEG_INFINITY;
        let mut per_symbol = vec![vec![f64::NEG_INFINITY; m]; k];
        let mut indices = vec![0usize; k];
        loop {
            let x: Vec<Complex64> = indices.iter().map(|&i| c.point(i)).collect();
            let metric = eval_aux_loglik(y, &x, s).unwrap() + k as f64 * ln_p;
            log_qp = crate::dsp::max_star(log_qp, metric);
            for (pos, &sym) in indices.iter().enumerate() {
                per_symbol[pos][sym] = crate::dsp::max_star(per_symbol[pos][sym], metric);
            }
            // odometer
            let mut pos = 0;
            loop {
                if pos == k {
                    let apps: Vec<Vec<f64>> = per_symbol
                        .iter()
                        .map(|row| {
                            let t = row
                                .iter()
                                .fold(f64::NEG_INFINITY, |a, &b| crate::dsp::max_star(a, b));
                            let mut p: Vec<f64> = row.iter().map(|v| (v - t).exp()).collect();
                            let s: f64 = p.iter().sum();
                            p.iter_mut().for_each(|v| *v /= s);
                            p
                        })
                        .collect();
                    return (apps, log_qp);
                }
                indices[pos] += 1;
                if indices[pos] < m {
                    break;
                }
                indices[pos] = 0;
                pos += 1;
            }
        }
    }

    #[test]
    fn matches_brute_force_enumeration() {
        // K = 8, QPSK, random L_r = 2 model
        let c = make_constellation(ModulationFormat::Qpsk);
        let model = UngerboeckModel::new(vec![1.0, 0.4, 0.12, 0.03], 0.25).unwrap();
        let s = channel_shorten(&model, 2).unwrap();
        let mut rng = derive_rng(21, SeedDomain::Oracle, 0);
        let y: Vec<Complex64> = (0..8)
            .map(|_| Complex64::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)))
            .collect();

        let got = bcjr_detect(&y, &s, &c, None).unwrap();
        let (apps, log_qp) = enumeration_oracle(&y, &s, &c);

        assert!(
            (got.log_qp - log_qp).abs() / log_qp.abs() < 1e-9,
            "log_qp {} vs {}",
            got.log_qp,
            log_qp
        );
        for k in 0..8 {
            for sym in 0..4 {
                let (i_idx, q_idx) = c.pam_indices(sym);
                let joint = got.i.app[k][i_idx] * got.q.app[k][q_idx];
                let rel = (joint - apps[k][sym]).abs() / apps[k][sym].max(1e-12);
                assert!(rel < 1e-9, "APP mismatch at k={k} sym={sym}: {joint} vs {}", apps[k][sym]);
            }
        }
    }

    #[test]
    fn high_snr_memoryless_concentrates() {
        let c = make_constellation(ModulationFormat::Qpsk);
        let n0 = 1e-4;
        let model = UngerboeckModel::new(vec![1.0], n0).unwrap();
        let s = channel_shorten(&model, 0).unwrap();
        let mut rng = derive_rng(3, SeedDomain::Oracle, 1);
        let tx: Vec<usize> = (0..64).map(|_| rng.random_range(0..4)).collect();
        let y: Vec<Complex64> = tx.iter().map(|&s| c.point(s)).collect();
        let out = bcjr_detect(&y, &s, &c, None).unwrap();
        for (k, &sym) in tx.iter().enumerate() {
            let (i_idx, q_idx) = c.pam_indices(sym);
            assert!(out.i.app[k][i_idx] > 0.999);
            assert!(out.q.app[k][q_idx] > 0.999);
        }
    }

    #[test]
    fn uniform_priors_equal_no_priors() {
        let c = make_constellation(ModulationFormat::Qam16);
        let model = UngerboeckModel::new(vec![1.0, 0.3], 0.2).unwrap();
        let s = channel_shorten(&model, 1).unwrap();
        let mut rng = derive_rng(4, SeedDomain::Oracle, 2);
        let y: Vec<Complex64> = (0..32)
            .map(|_| Complex64::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)))
            .collect();
        let uniform = TrellisPriors {
            i: vec![vec![0.25; 4]; 32],
            q: vec![vec![0.25; 4]; 32],
        };
        let a = bcjr_detect(&y, &s, &c, None).unwrap();
        let b = bcjr_detect(&y, &s, &c, Some(&uniform)).unwrap();
        assert!((a.log_qp - b.log_qp).abs() < 1e-9);
        for k in 0..32 {
            for lvl in 0..4 {
                assert!((a.i.app[k][lvl] - b.i.app[k][lvl]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn apps_normalize() {
        let c = make_constellation(ModulationFormat::Qam64);
        let model = UngerboeckModel::new(vec![1.0, 0.25, 0.05], 0.15).unwrap();
        let s = channel_shorten(&model, 1).unwrap();
        let mut rng = derive_rng(5, SeedDomain::Oracle, 3);
        let y: Vec<Complex64> = (0..40)
            .map(|_| Complex64::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)))
            .collect();
        let out = bcjr_detect(&y, &s, &c, None).unwrap();
        for row in out.i.app.iter().chain(out.q.app.iter()) {
            let sum: f64 = row.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn branch_metrics_sum_to_sequence_metric() {
        // the per-branch Ungerboeck decomposition must reproduce the
        // quadratic-form metric exactly
        let levels = [-0.9487, -0.3162, 0.3162, 0.9487];
        let target = [1.8, 0.55, 0.12];
        let mut rng = derive_rng(8, SeedDomain::Oracle, 0);
        let k = 40;
        let z: Vec<f64> = (0..k).map(|_| rng.random_range(-2.0..2.0)).collect();
        let path: Vec<usize> = (0..k).map(|_| rng.random_range(0..4)).collect();
        let x: Vec<f64> = path.iter().map(|&i| levels[i]).collect();
        let from_branches = path_metric(&z, &target, &levels, &path, Boundary::ZeroHistory);
        let direct = crate::isidet::pam_metric(&z, &x, &target, 0..k);
        assert!(
            (from_branches - direct).abs() < 1e-12,
            "{from_branches} vs {direct}"
        );
    }

    #[test]
    fn known_boundary_matches_manual_conditioning() {
        // conditioning on a known prefix must equal a zero-history run on
        // the extended block with the prefix symbols fixed
        let levels = [-1.0, 1.0];
        let target = [2.0, 0.6];
        let z_full = [0.3, -0.2, 0.9, 0.5, -1.1, 0.2];
        let prefix = [1usize];
        // manual: enumerate data symbols x_1..x_5 with x_0 pinned to level +1
        let mut log_qp = f64::NEG_INFINITY;
        for assignment in 0..(1 << 5) {
            let mut x = vec![1.0];
            for b in 0..5 {
                x.push(levels[(assignment >> b) & 1]);
            }
            let mut metric = 0.0;
            for k in 1..6 {
                let cross = target[1] * x[k - 1];
                metric += 2.0 * z_full[k] * x[k] - target[0] * x[k] * x[k] - 2.0 * x[k] * cross;
            }
            metric += 5.0 * (0.5f64).ln();
            log_qp = crate::dsp::max_star(log_qp, metric);
        }
        let got = bcjr_pam(&z_full[1..], &target, &levels, None, Boundary::Known(&prefix)).unwrap();
        assert!((got.log_qp - log_qp).abs() < 1e-10, "{} vs {log_qp}", got.log_qp);
    }
}
