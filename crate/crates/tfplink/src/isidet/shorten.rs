//! Optimal channel shortening for the Ungerboeck observation model.
//!
//! For a target response constrained to memory L_r, the Gaussian-input
//! achievable rate of the mismatched receiver reduces (after optimizing
//! the prefilter pointwise in frequency) to
//!
//!   I(U) = 1 + (1/2pi) int [ ln U(w) - W(w) U(w) ] dw,
//!
//! where W(w) = 2N0 / (G(w) + 2N0) and U = 1 + T(w) ranges over positive
//! trigonometric polynomials of degree L_r. Stationarity forces the
//! Fourier coefficients of 1/U to match those of W up to lag L_r, which is
//! exactly the Yule-Walker/maximum-entropy problem: 1/U is the AR(L_r)
//! spectrum fitted to the autocorrelation of W. Levinson-Durbin therefore
//! yields the optimum in closed form, with objective -log2(sigma^2) where
//! sigma^2 is the prediction-error power. The optimal prefilter is
//! H(w) = U(w) / (G(w) + 2N0).
//!
//! Limit cases: L_r >= L gives the trivial solution H^r = I/2N0,
//! G^r = G/2N0 (the exact matched metric), and L_r = 0 collapses the
//! prefilter to a scaled MMSE feedforward equalizer.

use super::{FilterTaps, ShortenerSolution, UngerboeckModel};
use crate::error::{Error, Result};
use std::f64::consts::PI;

const GRID: usize = 8192;
const MAX_SHORTENER_HALF_LEN: usize = 256;

/// Levinson-Durbin recursion on autocorrelation r_0..r_p.
/// Returns monic prediction coefficients a_0..a_p (a_0 = 1) and the final
/// prediction error power.
fn levinson(r: &[f64]) -> Result<(Vec<f64>, f64)> {
    let p = r.len() - 1;
    let mut a = vec![0.0; p + 1];
    a[0] = 1.0;
    let mut err = r[0];
    if !(err > 0.0) {
        return Err(Error::NonPsdTaps { min_spectrum: err });
    }
    for m in 1..=p {
        let mut acc = 0.0;
        for k in 0..m {
            acc += a[k] * r[m - k];
        }
        let kappa = -acc / err;
        let prev = a.clone();
        for k in 1..=m {
            a[k] = prev[k] + kappa * prev[m - k];
        }
        err *= 1.0 - kappa * kappa;
        if !(err > 0.0) {
            return Err(Error::NonPsdTaps { min_spectrum: err });
        }
    }
    Ok((a, err))
}

/// Full-memory Gaussian-input rate of the Ungerboeck channel,
/// (1/2pi) int log2(1 + G(w)/2N0) dw, bits per channel use.
pub fn gaussian_input_rate(model: &UngerboeckModel) -> f64 {
    let two_n0 = 2.0 * model.n0;
    let mut acc = 0.0;
    for k in 0..GRID {
        let omega = 2.0 * PI * k as f64 / GRID as f64;
        let g = model.spectrum(omega).max(0.0);
        acc += (1.0 + g / two_n0).log2();
    }
    acc / GRID as f64
}

/// Closed-form optimal channel shortener for detector memory `l_r`.
pub fn channel_shorten(model: &UngerboeckModel, l_r: usize) -> Result<ShortenerSolution> {
    let two_n0 = 2.0 * model.n0;
    if l_r >= model.memory() {
        // Trivial solution: the auxiliary channel equals the true one.
        let target: Vec<f64> = model.taps().iter().map(|g| g / two_n0).collect();
        return Ok(ShortenerSolution {
            target,
            shortener: FilterTaps::identity(1.0 / two_n0),
            memory: model.memory(),
            objective_bits: gaussian_input_rate(model),
        });
    }

    // W(w) on the grid, clamping tiny negative excursions of the truncated
    // tap spectrum to zero.
    let spectrum: Vec<f64> = (0..GRID)
        .map(|k| model.spectrum(2.0 * PI * k as f64 / GRID as f64).max(0.0))
        .collect();
    let w_grid: Vec<f64> = spectrum.iter().map(|&g| two_n0 / (g + two_n0)).collect();

    // Autocorrelation (Fourier coefficients) of W up to lag L_r.
    let mut r = vec![0.0; l_r + 1];
    for (lag, r_val) in r.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (k, &w) in w_grid.iter().enumerate() {
            acc += w * (2.0 * PI * k as f64 * lag as f64 / GRID as f64).cos();
        }
        *r_val = acc / GRID as f64;
    }

    let (a, sigma2) = levinson(&r)?;

    // U coefficients: u_i = (1/sigma^2) sum_k a_k a_{k+i}
    let mut target = vec![0.0; l_r + 1];
    for (i, t) in target.iter_mut().enumerate() {
        let mut acc = 0.0;
        for k in 0..=(l_r - i) {
            acc += a[k] * a[k + i];
        }
        *t = acc / sigma2;
    }
    target[0] -= 1.0; // g^r_0 = u_0 - 1

    // Prefilter H(w) = U(w)/(G(w)+2N0), real and even; recover symmetric
    // taps by cosine transform and truncate the negligible tail.
    let u_grid: Vec<f64> = (0..GRID)
        .map(|k| {
            let omega = 2.0 * PI * k as f64 / GRID as f64;
            let mut u = target[0] + 1.0;
            for (i, &t) in target.iter().enumerate().skip(1) {
                u += 2.0 * t * (omega * i as f64).cos();
            }
            u
        })
        .collect();
    let h_grid: Vec<f64> = u_grid
        .iter()
        .zip(&spectrum)
        .map(|(&u, &g)| u / (g + two_n0))
        .collect();
    let mut h_half = vec![0.0; MAX_SHORTENER_HALF_LEN + 1];
    for (lag, h_val) in h_half.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (k, &h) in h_grid.iter().enumerate() {
            acc += h * (2.0 * PI * k as f64 * lag as f64 / GRID as f64).cos();
        }
        *h_val = acc / GRID as f64;
    }
    let h_max = h_half.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let mut half_len = 0;
    for (lag, &v) in h_half.iter().enumerate() {
        if v.abs() > 1e-12 * h_max {
            half_len = lag;
        }
    }
    let mut taps = vec![0.0; 2 * half_len + 1];
    for lag in 0..=half_len {
        taps[half_len + lag] = h_half[lag];
        taps[half_len - lag] = h_half[lag];
    }

    Ok(ShortenerSolution {
        target,
        shortener: FilterTaps {
            taps,
            first_lag: -(half_len as isize),
        },
        memory: l_r,
        objective_bits: -sigma2.log2(),
    })
}
