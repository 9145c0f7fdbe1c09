//! Nonlinear fiber propagation: symmetric split-step Fourier solution of
//! the Manakov equation over span-structured amplified links, ASE
//! injection, and ideal digital backpropagation.
//!
//! Conventions: the linear step multiplies the spectrum by
//! exp(j beta2/2 w^2 z) and the Kerr step rotates the field by
//! exp(-j (8/9) gamma (|Ex|^2+|Ey|^2) dz). Backpropagation negates both
//! and inverts loss and gain, so a noiseless forward/backward pair is an
//! exact inverse at matched step counts.

use crate::dsp::{self, FftPair};
use crate::error::{Error, Result};
use crate::sigkit::{derive_rng, SampledWaveform, SeedDomain};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0; // m/s
pub const PLANCK: f64 = 6.626_070_15e-34; // J s

/// One fiber span.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberSpan {
    pub length_km: f64,
    /// Chromatic dispersion D, ps/nm/km.
    pub dispersion_ps_nm_km: f64,
    /// Power attenuation, dB/km.
    pub attenuation_db_km: f64,
    /// Nonlinear index gamma, 1/(W km).
    pub gamma_w_km: f64,
}

impl FiberSpan {
    pub fn validate(&self) -> Result<()> {
        if !(self.length_km > 0.0)
            || !(self.dispersion_ps_nm_km >= 0.0)
            || !(self.attenuation_db_km >= 0.0)
            || !(self.gamma_w_km >= 0.0)
        {
            return Err(Error::InvalidParameter(format!(
                "invalid fiber span: {self:?}"
            )));
        }
        Ok(())
    }

    /// Span loss in dB.
    pub fn loss_db(&self) -> f64 {
        self.attenuation_db_km * self.length_km
    }

    /// beta2 in s^2/km at the given reference wavelength.
    pub fn beta2_s2_km(&self, reference_wavelength_nm: f64) -> f64 {
        let lambda = reference_wavelength_nm * 1e-9;
        // D [ps/nm/km] = 1e-6 s/m^2; multiply by 1e3 m/km for per-km beta2
        let d_si = self.dispersion_ps_nm_km * 1e-6;
        -d_si * lambda * lambda / (2.0 * std::f64::consts::PI * SPEED_OF_LIGHT) * 1e3
    }
}

/// Span-structured amplified link.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinkSpec {
    pub spans: Vec<FiberSpan>,
    /// Amplifier gain after each span, dB. `None` means exact loss
    /// compensation (transparent spans).
    pub amp_gain_db: Option<Vec<f64>>,
    pub noise_figure_db: f64,
    pub reference_wavelength_nm: f64,
}

impl LinkSpec {
    pub fn transparent(spans: Vec<FiberSpan>, noise_figure_db: f64) -> Self {
        Self {
            spans,
            amp_gain_db: None,
            noise_figure_db,
            reference_wavelength_nm: 1550.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for s in &self.spans {
            s.validate()?;
        }
        if !self.spans.is_empty() && self.noise_figure_db < 3.0 {
            return Err(Error::InvalidParameter(format!(
                "noise figure must be >= 3 dB, got {}",
                self.noise_figure_db
            )));
        }
        if let Some(g) = &self.amp_gain_db {
            if g.len() != self.spans.len() {
                return Err(Error::LengthMismatch {
                    left: g.len(),
                    right: self.spans.len(),
                });
            }
        }
        Ok(())
    }

    pub fn gain_db(&self, span_index: usize) -> f64 {
        match &self.amp_gain_db {
            Some(g) => g[span_index],
            None => self.spans[span_index].loss_db(),
        }
    }

    pub fn total_length_km(&self) -> f64 {
        self.spans.iter().map(|s| s.length_km).sum()
    }

    /// Accumulated beta2 * length, s^2.
    pub fn total_beta2_s2(&self) -> f64 {
        self.spans
            .iter()
            .map(|s| s.beta2_s2_km(self.reference_wavelength_nm) * s.length_km)
            .sum()
    }

    /// Optical carrier frequency at the reference wavelength, Hz.
    pub fn carrier_freq_hz(&self) -> f64 {
        SPEED_OF_LIGHT / (self.reference_wavelength_nm * 1e-9)
    }

    /// Analytic per-polarization ASE PSD accumulated over all amplifiers,
    /// W/Hz: sum of (G-1) h nu NF/2.
    pub fn accumulated_ase_psd(&self) -> f64 {
        let nf_lin = 10f64.powf(self.noise_figure_db / 10.0);
        let h_nu = PLANCK * self.carrier_freq_hz();
        (0..self.spans.len())
            .map(|i| {
                let g = 10f64.powf(self.gain_db(i) / 10.0);
                (g - 1.0) * h_nu * nf_lin / 2.0
            })
            .sum()
    }
}

/// Split-step control parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SsfmControl {
    pub max_step_km: f64,
    /// Cap on the per-step nonlinear phase rotation, rad.
    pub max_nl_phase_rad: f64,
    /// Seed for ASE generation.
    pub seed: u64,
}

impl Default for SsfmControl {
    fn default() -> Self {
        Self {
            max_step_km: 1.0,
            max_nl_phase_rad: 3e-3,
            seed: 0,
        }
    }
}

impl SsfmControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.max_step_km > 0.0) || !(self.max_nl_phase_rad > 0.0) {
            return Err(Error::InvalidParameter(
                "SSFM step bounds must be positive".into(),
            ));
        }
        Ok(())
    }
}

const MANAKOV_FACTOR: f64 = 8.0 / 9.0;

fn peak_pair_power(w: &SampledWaveform) -> f64 {
    w.x.iter()
        .zip(&w.y)
        .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
        .fold(0.0, f64::max)
}

fn step_count(span: &FiberSpan, ctrl: &SsfmControl, peak_power_w: f64) -> usize {
    let mut step = ctrl.max_step_km;
    if span.gamma_w_km > 0.0 && peak_power_w > 0.0 {
        let nl_limited =
            ctrl.max_nl_phase_rad / (MANAKOV_FACTOR * span.gamma_w_km * peak_power_w);
        step = step.min(nl_limited);
    }
    ((span.length_km / step).ceil() as usize).max(1)
}

/// Frequency response of the linear operator over `dz_km`: dispersion
/// phase plus field attenuation.
fn linear_response(
    omegas: &[f64],
    beta2_s2_km: f64,
    attenuation_db_km: f64,
    dz_km: f64,
) -> Vec<Complex64> {
    let amp = 10f64.powf(-attenuation_db_km * dz_km / 20.0);
    omegas
        .iter()
        .map(|&w| {
            let phase = beta2_s2_km / 2.0 * w * w * dz_km;
            Complex64::from_polar(amp, phase)
        })
        .collect()
}

fn apply_response(buf: &mut [Complex64], response: &[Complex64], fft: &FftPair) {
    fft.forward(buf);
    for (s, h) in buf.iter_mut().zip(response) {
        *s *= h;
    }
    fft.inverse(buf);
}

fn kerr_rotate(x: &mut [Complex64], y: &mut [Complex64], gamma_w_km: f64, dz_km: f64) {
    let coef = MANAKOV_FACTOR * gamma_w_km * dz_km;
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let p = a.norm_sqr() + b.norm_sqr();
        let rot = Complex64::from_polar(1.0, -coef * p);
        *a *= rot;
        *b *= rot;
    }
}

/// Propagate one span with the symmetric split-step scheme. Internal
/// entry point shared by forward propagation and backpropagation; sign
/// flips select the direction.
fn run_span(
    w: &mut SampledWaveform,
    beta2_s2_km: f64,
    attenuation_db_km: f64,
    gamma_w_km: f64,
    length_km: f64,
    n_steps: usize,
) {
    let n = w.len();
    let fft = FftPair::new(n);
    let omegas = dsp::angular_freqs(n, w.sample_rate);
    let dz = length_km / n_steps as f64;
    let half = linear_response(&omegas, beta2_s2_km, attenuation_db_km, dz / 2.0);
    let full = linear_response(&omegas, beta2_s2_km, attenuation_db_km, dz);

    // D/2 (N D)^{m-1} N D/2: merge interior half steps into full steps
    apply_response(&mut w.x, &half, &fft);
    apply_response(&mut w.y, &half, &fft);
    for step in 0..n_steps {
        kerr_rotate(&mut w.x, &mut w.y, gamma_w_km, dz);
        let resp = if step + 1 == n_steps { &half } else { &full };
        apply_response(&mut w.x, resp, &fft);
        apply_response(&mut w.y, resp, &fft);
    }
}

/// Propagate a waveform through one fiber span.
pub fn propagate_span(
    w: &SampledWaveform,
    span: &FiberSpan,
    ctrl: &SsfmControl,
    reference_wavelength_nm: f64,
) -> Result<SampledWaveform> {
    span.validate()?;
    ctrl.validate()?;
    w.assert_finite("propagation input")?;
    let mut out = w.clone();
    let n_steps = step_count(span, ctrl, peak_pair_power(w));
    run_span(
        &mut out,
        span.beta2_s2_km(reference_wavelength_nm),
        span.attenuation_db_km,
        span.gamma_w_km,
        span.length_km,
        n_steps,
    );
    out.assert_finite("span propagation")?;
    Ok(out)
}

/// EDFA: scale the field by sqrt(G) and add circular complex white ASE of
/// PSD (G-1) h nu NF/2 per polarization, independently on each
/// polarization across the full simulation band.
pub fn amplify(
    w: &SampledWaveform,
    gain_db: f64,
    noise_figure_db: f64,
    carrier_freq_hz: f64,
    seed: u64,
) -> Result<SampledWaveform> {
    if gain_db < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "amplifier gain must be >= 0 dB, got {gain_db}"
        )));
    }
    let g = 10f64.powf(gain_db / 10.0);
    let nf_lin = 10f64.powf(noise_figure_db / 10.0);
    let mut out = w.clone();
    out.scale(g.sqrt());
    let psd = (g - 1.0) * PLANCK * carrier_freq_hz * nf_lin / 2.0;
    if psd > 0.0 {
        // total noise power in the simulated band = PSD * sample_rate
        let sigma = (psd * w.sample_rate / 2.0).sqrt(); // per real component
        let mut rng = derive_rng(seed, SeedDomain::AmplifierNoise, 0);
        for pol in [&mut out.x, &mut out.y] {
            for v in pol.iter_mut() {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                *v += Complex64::new(re * sigma, im * sigma);
            }
        }
    }
    Ok(out)
}

/// Propagate through the whole link, alternating spans and amplifiers.
///
/// Returns the output waveform and the analytic accumulated per-polarization
/// ASE PSD (W/Hz) for SNR calibration.
pub fn propagate_link(
    w: &SampledWaveform,
    link: &LinkSpec,
    ctrl: &SsfmControl,
) -> Result<(SampledWaveform, f64)> {
    link.validate()?;
    let carrier = link.carrier_freq_hz();
    let mut out = w.clone();
    for (i, span) in link.spans.iter().enumerate() {
        out = propagate_span(&out, span, ctrl, link.reference_wavelength_nm)?;
        out = amplify(
            &out,
            link.gain_db(i),
            link.noise_figure_db,
            carrier,
            ctrl.seed ^ ((i as u64 + 1) << 32),
        )?;
    }
    Ok((out, link.accumulated_ase_psd()))
}

/// Ideal digital backpropagation: spans in reverse order with negated
/// beta2 and gamma, inverted loss and amplifier gains, and the same step
/// policy as the forward direction.
pub fn backpropagate(
    w: &SampledWaveform,
    link: &LinkSpec,
    ctrl: &SsfmControl,
) -> Result<SampledWaveform> {
    link.validate()?;
    ctrl.validate()?;
    w.assert_finite("backpropagation input")?;
    let mut out = w.clone();
    for (i, span) in link.spans.iter().enumerate().rev() {
        // undo the amplifier that followed this span
        let g = 10f64.powf(link.gain_db(i) / 10.0);
        out.scale(1.0 / g.sqrt());
        // the backward span has gain; the peak power used for the step
        // bound is reached at its output
        let peak_out =
            peak_pair_power(&out) * 10f64.powf(span.attenuation_db_km * span.length_km / 10.0);
        let n_steps = step_count(span, ctrl, peak_out);
        run_span(
            &mut out,
            -span.beta2_s2_km(link.reference_wavelength_nm),
            -span.attenuation_db_km,
            -span.gamma_w_km,
            span.length_km,
            n_steps,
        );
    }
    out.assert_finite("backpropagation")?;
    Ok(out)
}
