//! ISI detection: Ungerboeck observation model, optimal channel
//! shortening, auxiliary-channel likelihood evaluation, and per-quadrature
//! BCJR MAP symbol detection.

mod bcjr;
mod metric;
mod shorten;

pub use bcjr::{bcjr_detect, bcjr_pam, Boundary, QuadPosteriors, TrellisPosteriors, TrellisPriors};
pub use metric::{eval_aux_loglik, pam_metric};
pub use shorten::{channel_shorten, gaussian_input_rate};

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Matched-filter-output observation model y = Gx + n for an ISI channel
/// with real symmetric autocorrelation taps and noise E{n n^H} = 2 N0 G.
#[derive(Debug, Clone)]
pub struct UngerboeckModel {
    /// g_0..g_L; g_{-i} = g_i by Hermitian symmetry.
    taps: Vec<f64>,
    /// Noise level N0 (per the observation's own scaling).
    pub n0: f64,
}

impl UngerboeckModel {
    pub fn new(taps: Vec<f64>, n0: f64) -> Result<Self> {
        if taps.is_empty() || !(taps[0] > 0.0) {
            return Err(Error::InvalidParameter(
                "Ungerboeck taps must start with g_0 > 0".into(),
            ));
        }
        if !(n0 > 0.0) {
            return Err(Error::InvalidNoiseLevel { n0 });
        }
        let model = Self { taps, n0 };
        // The complete autocorrelation of any finite-energy pulse is PSD.
        // Truncating the slowly decaying tail of a near-brickwall filter
        // dents the folded spectrum by up to ~1e-3 relative; those dips
        // are clamped where the spectrum is used. Only grossly indefinite
        // tap sets (invalid inputs rather than truncation artifacts) are
        // rejected here.
        let min_spec = model.min_spectrum(4096);
        if min_spec < -1e-2 * model.taps[0] {
            return Err(Error::NonPsdTaps {
                min_spectrum: min_spec,
            });
        }
        Ok(model)
    }

    /// Channel memory L.
    pub fn memory(&self) -> usize {
        self.taps.len() - 1
    }

    /// g_i for any signed lag (0 outside +/-L).
    pub fn tap(&self, lag: isize) -> f64 {
        let i = lag.unsigned_abs();
        self.taps.get(i).copied().unwrap_or(0.0)
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Folded spectrum G(w) = sum_i g_i e^{-jwi}, real by symmetry.
    pub fn spectrum(&self, omega: f64) -> f64 {
        let mut acc = self.taps[0];
        for (i, &g) in self.taps.iter().enumerate().skip(1) {
            acc += 2.0 * g * (omega * i as f64).cos();
        }
        acc
    }

    fn min_spectrum(&self, grid: usize) -> f64 {
        (0..grid)
            .map(|k| self.spectrum(2.0 * std::f64::consts::PI * k as f64 / grid as f64))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Compute Ungerboeck taps g_i = integral h(t) h(t - iT) dt from a sampled
/// aggregate pulse, truncated to |i| <= max_memory. Hermitian symmetry is
/// exact by construction for real pulses.
pub fn ungerboeck_taps(
    pulse: &[f64],
    samples_per_symbol: usize,
    dt: f64,
    max_memory: usize,
    n0: f64,
) -> Result<UngerboeckModel> {
    let energy: f64 = pulse.iter().map(|v| v * v).sum::<f64>() * dt;
    if energy < 1e-30 {
        return Err(Error::PulseEnergy { energy });
    }
    let taps: Vec<f64> = (0..=max_memory)
        .map(|lag| {
            let shift = lag * samples_per_symbol;
            let mut acc = 0.0;
            for i in shift..pulse.len() {
                acc += pulse[i] * pulse[i - shift];
            }
            acc * dt
        })
        .collect();
    UngerboeckModel::new(taps, n0)
}

/// Effective channel memory: largest lag whose tap exceeds
/// `rel_threshold * g_0`.
pub fn effective_memory(model: &UngerboeckModel, rel_threshold: f64) -> usize {
    let g0 = model.taps[0];
    model
        .taps
        .iter()
        .enumerate()
        .rev()
        .find(|(_, &g)| g.abs() > rel_threshold * g0)
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// A real FIR applied to the sufficient statistics; `first_lag` is the lag
/// of `taps[0]`, so `z_k = sum_i taps[i] * y[k + first_lag + i]`.
#[derive(Debug, Clone)]
pub struct FilterTaps {
    pub taps: Vec<f64>,
    pub first_lag: isize,
}

impl FilterTaps {
    pub fn identity(scale: f64) -> Self {
        Self {
            taps: vec![scale],
            first_lag: 0,
        }
    }

    /// Apply to a complex sequence; indices outside the input are zero.
    pub fn apply(&self, y: &[Complex64]) -> Vec<Complex64> {
        let n = y.len() as isize;
        (0..n)
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, &h) in self.taps.iter().enumerate() {
                    let idx = k + self.first_lag + j as isize;
                    if idx >= 0 && idx < n {
                        acc += h * y[idx as usize];
                    }
                }
                acc
            })
            .collect()
    }

    /// Frequency response at angular frequency `omega` (rad/symbol).
    pub fn response(&self, omega: f64) -> Complex64 {
        self.taps
            .iter()
            .enumerate()
            .map(|(j, &h)| {
                let lag = (self.first_lag + j as isize) as f64;
                // taps act on y_{k+lag}: response e^{+j w lag}
                h * Complex64::from_polar(1.0, omega * lag)
            })
            .sum()
    }
}

/// Channel shortener h^r plus reduced target response g^r with memory L_r,
/// defining the auxiliary law
/// q(y|x) = exp(2 Re(y^H H^r x) - x^H G^r x) (unnormalized).
#[derive(Debug, Clone)]
pub struct ShortenerSolution {
    /// g^r_0..g^r_{L_r}; Hermitian continuation implied.
    pub target: Vec<f64>,
    pub shortener: FilterTaps,
    /// Detector memory L_r.
    pub memory: usize,
    /// Achievable-rate value at the optimum for Gaussian inputs,
    /// bits per channel use per polarization.
    pub objective_bits: f64,
}

impl ShortenerSolution {
    /// Target tap for any signed lag.
    pub fn target_tap(&self, lag: isize) -> f64 {
        let i = lag.unsigned_abs();
        if i <= self.memory {
            self.target[i]
        } else {
            0.0
        }
    }

    /// Prefilter the observations: z = H^{rH} y.
    pub fn filter_observations(&self, y: &[Complex64]) -> Vec<Complex64> {
        self.shortener.apply(y)
    }
}
