//! Shared signal-processing helpers: FFT wrappers, frequency grids,
//! spectral estimates, and error metrics.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Forward/inverse FFT pair for one transform length.
///
/// rustfft leaves transforms unnormalized; `inverse` here divides by N so
/// that `inverse(forward(x)) == x`.
pub struct FftPair {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    len: usize,
}

impl FftPair {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            fwd: planner.plan_fft_forward(len),
            inv: planner.plan_fft_inverse(len),
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.len);
        self.fwd.process(buf);
    }

    pub fn inverse(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.len);
        self.inv.process(buf);
        let scale = 1.0 / self.len as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }
}

/// Angular frequency (rad/s) of each FFT bin for length `n` at `sample_rate`.
pub fn angular_freqs(n: usize, sample_rate: f64) -> Vec<f64> {
    let df = sample_rate / n as f64;
    (0..n)
        .map(|k| {
            let f = if k <= (n - 1) / 2 {
                k as f64 * df
            } else {
                (k as f64 - n as f64) * df
            };
            2.0 * std::f64::consts::PI * f
        })
        .collect()
}

/// Baseband frequency (Hz) of each FFT bin.
pub fn bin_freqs(n: usize, sample_rate: f64) -> Vec<f64> {
    angular_freqs(n, sample_rate)
        .into_iter()
        .map(|w| w / (2.0 * std::f64::consts::PI))
        .collect()
}

/// Multiply a time-domain signal by a frequency response, in place.
pub fn apply_freq_response(samples: &mut [Complex64], response: &[Complex64]) {
    let pair = FftPair::new(samples.len());
    pair.forward(samples);
    for (s, h) in samples.iter_mut().zip(response) {
        *s *= h;
    }
    pair.inverse(samples);
}

/// Normalized mean-square error between two sequences of equal length.
pub fn nmse(estimate: &[Complex64], reference: &[Complex64]) -> f64 {
    assert_eq!(estimate.len(), reference.len());
    let mut num = 0.0;
    let mut den = 0.0;
    for (e, r) in estimate.iter().zip(reference) {
        num += (e - r).norm_sqr();
        den += r.norm_sqr();
    }
    num / den
}

/// Averaged periodogram (Welch, rectangular window, no overlap).
///
/// Returns (frequency in Hz ascending, PSD in W/Hz) with the spectrum
/// rotated so negative frequencies come first.
pub fn periodogram(samples: &[Complex64], sample_rate: f64, nfft: usize) -> (Vec<f64>, Vec<f64>) {
    let segments = (samples.len() / nfft).max(1);
    let nfft = nfft.min(samples.len());
    let pair = FftPair::new(nfft);
    let mut psd = vec![0.0; nfft];
    for seg in 0..segments {
        let mut buf: Vec<Complex64> = samples[seg * nfft..(seg + 1) * nfft].to_vec();
        pair.forward(&mut buf);
        for (p, v) in psd.iter_mut().zip(&buf) {
            *p += v.norm_sqr();
        }
    }
    let scale = 1.0 / (segments as f64 * nfft as f64 * sample_rate);
    for p in psd.iter_mut() {
        *p *= scale;
    }
    // fftshift so the axis is monotone in frequency
    let half = nfft.div_ceil(2);
    let mut freqs = bin_freqs(nfft, sample_rate);
    freqs.rotate_left(half);
    psd.rotate_left(half);
    (freqs, psd)
}

/// Width of the band where the PSD stays within 3 dB of its peak.
pub fn occupied_bandwidth_3db(freqs: &[f64], psd: &[f64]) -> f64 {
    let peak = psd.iter().cloned().fold(f64::MIN, f64::max);
    let thresh = peak / 2.0;
    let lo = freqs
        .iter()
        .zip(psd)
        .find(|(_, &p)| p >= thresh)
        .map(|(f, _)| *f)
        .unwrap_or(0.0);
    let hi = freqs
        .iter()
        .zip(psd)
        .rev()
        .find(|(_, &p)| p >= thresh)
        .map(|(f, _)| *f)
        .unwrap_or(0.0);
    hi - lo
}

/// Jacobian logarithm: ln(e^a + e^b), exact.
#[inline]
pub fn max_star(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}
