//! Transmitter chain: electrical pulse shaping, Mach-Zehnder modulation,
//! transmit optical filtering, and superchannel assembly.
//!
//! Pulses with support at most one symbol interval (NRZ, RZ50) go through
//! the nonlinear MZ transfer function with an arcsine predistortion of the
//! drive levels, which reproduces exact linear modulation because the
//! rectangular pulses never overlap. Root-raised-cosine pulses have longer
//! support and assume a linearized modulator.

use crate::dsp;
use crate::error::{Error, Result};
use crate::sigkit::{Constellation, SampledWaveform};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{Read, Write};

/// Frequency plan for a superchannel of `n_carriers` carriers.
#[derive(Debug, Clone)]
pub struct CarrierPlan {
    pub n_carriers: usize,
    /// Carrier spacing F, Hz.
    pub spacing_hz: f64,
    /// Symbol interval T, s.
    pub symbol_interval: f64,
    /// Per-carrier delays tau, s.
    pub delays: Vec<f64>,
    /// Per-carrier initial phases theta, rad.
    pub phases: Vec<f64>,
    /// Launch power per carrier (both polarizations), W.
    pub launch_power_per_carrier: f64,
}

impl CarrierPlan {
    /// Plan with zero delays/phases (perfect synchronization).
    pub fn synchronized(
        n_carriers: usize,
        spacing_hz: f64,
        symbol_interval: f64,
        launch_power_per_carrier: f64,
    ) -> Result<Self> {
        let plan = Self {
            n_carriers,
            spacing_hz,
            symbol_interval,
            delays: vec![0.0; n_carriers],
            phases: vec![0.0; n_carriers],
            launch_power_per_carrier,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_carriers == 0 {
            return Err(Error::InvalidParameter("carrier count must be >= 1".into()));
        }
        if !(self.spacing_hz > 0.0) || !(self.symbol_interval > 0.0) {
            return Err(Error::InvalidParameter(
                "carrier spacing and symbol interval must be positive".into(),
            ));
        }
        if self.delays.len() != self.n_carriers || self.phases.len() != self.n_carriers {
            return Err(Error::LengthMismatch {
                left: self.delays.len(),
                right: self.n_carriers,
            });
        }
        Ok(())
    }

    /// Frequency offset of carrier `index`, symmetric around 0.
    pub fn carrier_offset_hz(&self, index: usize) -> f64 {
        (index as f64 - (self.n_carriers as f64 - 1.0) / 2.0) * self.spacing_hz
    }

    /// Index of the carrier used for performance evaluation.
    pub fn center_carrier(&self) -> usize {
        self.n_carriers / 2
    }
}

/// Electrical shaping pulse selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum PulseSpec {
    /// Unit rectangle of width T.
    Nrz,
    /// Unit rectangle of width T/2 centered in the symbol slot.
    Rz50,
    /// Unit-energy root-raised-cosine, truncated to +/-16 T.
    Rrc { rolloff: f64 },
}

impl PulseSpec {
    fn validate(&self) -> Result<()> {
        if let PulseSpec::Rrc { rolloff } = self {
            if !(*rolloff > 0.0 && *rolloff <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "RRC roll-off must be in (0,1], got {rolloff}"
                )));
            }
        }
        Ok(())
    }
}

/// A sampled shaping pulse plus its placement metadata.
#[derive(Debug, Clone)]
pub struct SampledPulse {
    pub samples: Vec<f64>,
    /// Sample index of the pulse center (symbol k sits at k*T + center).
    pub center: usize,
    pub sample_rate: f64,
    pub symbol_interval: f64,
    /// True when the pulse fits inside one symbol slot and can be driven
    /// directly through the MZ modulator.
    pub single_slot: bool,
}

/// Build the sampled shaping pulse for symbol interval `T` at `sample_rate`.
///
/// Requires at least 8 samples per symbol so rectangular edges and the RRC
/// tail are representable.
pub fn make_pulse(spec: &PulseSpec, symbol_interval: f64, sample_rate: f64) -> Result<SampledPulse> {
    spec.validate()?;
    let sps_f = sample_rate * symbol_interval;
    if sps_f < 8.0 - 1e-9 {
        return Err(Error::Undersampled {
            samples_per_symbol: sps_f,
            min: 8,
        });
    }
    let sps = sps_f.round() as usize;
    if (sps_f - sps as f64).abs() > 1e-6 {
        return Err(Error::InvalidParameter(format!(
            "sample rate must be an integer multiple of the symbol rate (got {sps_f} samples/symbol)"
        )));
    }
    match spec {
        PulseSpec::Nrz => Ok(SampledPulse {
            samples: vec![1.0; sps],
            center: sps / 2,
            sample_rate,
            symbol_interval,
            single_slot: true,
        }),
        PulseSpec::Rz50 => {
            let mut samples = vec![0.0; sps];
            let start = sps / 4;
            for s in samples.iter_mut().skip(start).take(sps / 2) {
                *s = 1.0;
            }
            Ok(SampledPulse {
                samples,
                center: sps / 2,
                sample_rate,
                symbol_interval,
                single_slot: true,
            })
        }
        PulseSpec::Rrc { rolloff } => {
            let half = 16 * sps;
            let n = 2 * half + 1;
            let mut samples = vec![0.0; n];
            for (i, s) in samples.iter_mut().enumerate() {
                let t = (i as f64 - half as f64) / sps as f64; // in symbol units
                *s = rrc_value(t, *rolloff);
            }
            // normalize to unit energy
            let dt = 1.0 / sample_rate;
            let energy: f64 = samples.iter().map(|v| v * v).sum::<f64>() * dt;
            if energy <= 0.0 {
                return Err(Error::PulseEnergy { energy });
            }
            let scale = 1.0 / energy.sqrt();
            for s in samples.iter_mut() {
                *s *= scale;
            }
            Ok(SampledPulse {
                samples,
                center: half,
                sample_rate,
                symbol_interval,
                single_slot: false,
            })
        }
    }
}

/// Root-raised-cosine impulse response at `t` symbol intervals (unnormalized).
fn rrc_value(t: f64, alpha: f64) -> f64 {
    let eps = 1e-9;
    if t.abs() < eps {
        return 1.0 - alpha + 4.0 * alpha / PI;
    }
    let quarter = 1.0 / (4.0 * alpha);
    if (t.abs() - quarter).abs() < eps {
        let a = (1.0 + 2.0 / PI) * (PI / (4.0 * alpha)).sin();
        let b = (1.0 - 2.0 / PI) * (PI / (4.0 * alpha)).cos();
        return alpha / 2f64.sqrt() * (a + b);
    }
    let num = (PI * t * (1.0 - alpha)).sin() + 4.0 * alpha * t * (PI * t * (1.0 + alpha)).cos();
    let den = PI * t * (1.0 - (4.0 * alpha * t).powi(2));
    num / den
}

/// Ideal Mach-Zehnder modulator: field = sin(pi/2 dI) + j sin(pi/2 dQ).
///
/// Drives must stay in [-1, 1]; out-of-range values are rejected rather
/// than silently clipped.
pub fn mz_modulate(drive_i: &[f64], drive_q: &[f64]) -> Result<Vec<Complex64>> {
    if drive_i.len() != drive_q.len() {
        return Err(Error::LengthMismatch {
            left: drive_i.len(),
            right: drive_q.len(),
        });
    }
    let mut out = Vec::with_capacity(drive_i.len());
    for (&di, &dq) in drive_i.iter().zip(drive_q) {
        for v in [di, dq] {
            if v.abs() > 1.0 + 1e-12 {
                return Err(Error::DriveOutOfRange { value: v });
            }
        }
        out.push(Complex64::new(
            (PI / 2.0 * di).sin(),
            (PI / 2.0 * dq).sin(),
        ));
    }
    Ok(out)
}

/// Gaussian optical filter: order 1 or 4, 3-dB bandwidth `bandwidth_hz`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalFilterSpec {
    pub order: u32,
    pub bandwidth_hz: f64,
}

impl OpticalFilterSpec {
    pub fn new(order: u32, bandwidth_hz: f64) -> Result<Self> {
        if order != 1 && order != 4 {
            return Err(Error::InvalidParameter(format!(
                "Gaussian filter order must be 1 or 4, got {order}"
            )));
        }
        if !(bandwidth_hz > 0.0) {
            return Err(Error::InvalidParameter(
                "filter bandwidth must be positive".into(),
            ));
        }
        Ok(Self {
            order,
            bandwidth_hz,
        })
    }

    /// Magnitude response at frequency `f` (zero phase).
    pub fn response(&self, f: f64) -> f64 {
        let x = 2.0 * f / self.bandwidth_hz;
        (-(2f64.ln() / 2.0) * x.powi(2 * self.order as i32)).exp()
    }
}

/// Apply the Gaussian filter to both polarizations via frequency-domain
/// multiplication. Zero phase; pure magnitude shaping.
pub fn apply_gaussian_filter(
    w: &SampledWaveform,
    spec: &OpticalFilterSpec,
) -> Result<SampledWaveform> {
    if spec.bandwidth_hz >= w.sample_rate {
        return Err(Error::FilterBandwidth {
            bandwidth_hz: spec.bandwidth_hz,
            sample_rate: w.sample_rate,
        });
    }
    let n = w.len();
    let response: Vec<Complex64> = dsp::bin_freqs(n, w.sample_rate)
        .into_iter()
        .map(|f| Complex64::new(spec.response(f), 0.0))
        .collect();
    let mut out = w.clone();
    dsp::apply_freq_response(&mut out.x, &response);
    dsp::apply_freq_response(&mut out.y, &response);
    Ok(out)
}

/// Shape one carrier's dual-polarization waveform from symbol indices.
///
/// The buffer is treated as circular (length `n_symbols * sps`), which
/// makes later frequency-domain filtering and propagation exact.
pub fn shape_carrier(
    symbols_x: &[usize],
    symbols_y: &[usize],
    c: &Constellation,
    pulse: &SampledPulse,
    tx_filter: &OpticalFilterSpec,
) -> Result<SampledWaveform> {
    if symbols_x.len() != symbols_y.len() {
        return Err(Error::LengthMismatch {
            left: symbols_x.len(),
            right: symbols_y.len(),
        });
    }
    let sps = (pulse.sample_rate * pulse.symbol_interval).round() as usize;
    let n = symbols_x.len() * sps;
    let mut field_x = vec![Complex64::new(0.0, 0.0); n];
    let mut field_y = vec![Complex64::new(0.0, 0.0); n];
    let pam_max = c
        .pam_levels
        .iter()
        .fold(0.0f64, |acc, &l| acc.max(l.abs()));

    if pulse.single_slot {
        // MZ path: predistorted rectangular drive, exact per-symbol mapping.
        for (symbols, field) in [(symbols_x, &mut field_x), (symbols_y, &mut field_y)] {
            let mut drive_i = vec![0.0; n];
            let mut drive_q = vec![0.0; n];
            for (k, &s) in symbols.iter().enumerate() {
                let p = c.point(s);
                let di = 2.0 / PI * (p.re / pam_max).asin();
                let dq = 2.0 / PI * (p.im / pam_max).asin();
                for (j, &pv) in pulse.samples.iter().enumerate() {
                    let idx = (k * sps + j) % n;
                    drive_i[idx] += di * pv;
                    drive_q[idx] += dq * pv;
                }
            }
            let modulated = mz_modulate(&drive_i, &drive_q)?;
            for (f, m) in field.iter_mut().zip(modulated) {
                *f = m * pam_max;
            }
        }
    } else {
        // Linearized modulator for pulses spanning several symbols.
        for (symbols, field) in [(symbols_x, &mut field_x), (symbols_y, &mut field_y)] {
            for (k, &s) in symbols.iter().enumerate() {
                let p = c.point(s);
                let start = k * sps;
                for (j, &pv) in pulse.samples.iter().enumerate() {
                    let idx = (start + j) % n;
                    field[idx] += p * pv;
                }
            }
        }
    }

    let mut w = SampledWaveform::new(field_x, field_y, pulse.sample_rate)?;
    w.t0 = -(pulse.center as f64) / pulse.sample_rate;
    apply_gaussian_filter(&w, tx_filter)
}

/// Linear superposition stage of [`assemble_superchannel`]: delays, carrier
/// phases/frequencies, and the sum. No power scaling.
pub fn superpose(per_carrier: &[SampledWaveform], plan: &CarrierPlan) -> Result<SampledWaveform> {
    plan.validate()?;
    if per_carrier.len() != plan.n_carriers {
        return Err(Error::LengthMismatch {
            left: per_carrier.len(),
            right: plan.n_carriers,
        });
    }
    let sample_rate = per_carrier[0].sample_rate;
    let n = per_carrier[0].len();
    for w in per_carrier {
        if w.sample_rate != sample_rate || w.len() != n {
            return Err(Error::InvalidParameter(
                "all carrier waveforms must share sample rate and length".into(),
            ));
        }
    }
    let t0 = per_carrier[0].t0;
    let mut out = SampledWaveform::zeros(n, sample_rate);
    out.t0 = t0;
    for (idx, w) in per_carrier.iter().enumerate() {
        let offset = plan.carrier_offset_hz(idx);
        let theta = plan.phases[idx];
        let shifted = delay_circular(w, plan.delays[idx]);
        for i in 0..n {
            let t = t0 + i as f64 / sample_rate;
            let rot = Complex64::from_polar(1.0, 2.0 * PI * offset * t + theta);
            out.x[i] += shifted.x[i] * rot;
            out.y[i] += shifted.y[i] * rot;
        }
    }
    Ok(out)
}

/// Circular fractional delay via a frequency-domain phase ramp.
fn delay_circular(w: &SampledWaveform, delay_s: f64) -> SampledWaveform {
    if delay_s == 0.0 {
        return w.clone();
    }
    let n = w.len();
    let response: Vec<Complex64> = dsp::angular_freqs(n, w.sample_rate)
        .into_iter()
        .map(|omega| Complex64::from_polar(1.0, -omega * delay_s))
        .collect();
    let mut out = w.clone();
    dsp::apply_freq_response(&mut out.x, &response);
    dsp::apply_freq_response(&mut out.y, &response);
    out
}

/// Build the transmitted superchannel: scale each carrier to the planned
/// launch power, then superpose at the planned frequency offsets.
pub fn assemble_superchannel(
    per_carrier: &[SampledWaveform],
    plan: &CarrierPlan,
    tx_bandwidth_hz: f64,
) -> Result<SampledWaveform> {
    plan.validate()?;
    let sample_rate = per_carrier
        .first()
        .map(|w| w.sample_rate)
        .ok_or_else(|| Error::InvalidParameter("no carrier waveforms".into()))?;
    let occupied = (plan.n_carriers as f64 - 1.0) * plan.spacing_hz + tx_bandwidth_hz;
    if occupied >= sample_rate {
        return Err(Error::Aliasing {
            occupied_hz: occupied,
            sample_rate,
        });
    }
    let mut scaled = Vec::with_capacity(per_carrier.len());
    for w in per_carrier {
        let mut s = w.clone();
        let p = s.power();
        if p <= 0.0 {
            return Err(Error::PulseEnergy { energy: p });
        }
        s.scale((plan.launch_power_per_carrier / p).sqrt());
        scaled.push(s);
    }
    superpose(&scaled, plan)
}

/// Debug waveform dump: little-endian header {sample_rate: f64, n: u64,
/// pols: u8} followed by per-sample interleaved (re, im) f64 pairs for
/// each polarization.
pub fn dump_waveform<W: Write>(w: &SampledWaveform, sink: &mut W) -> std::io::Result<()> {
    sink.write_all(&w.sample_rate.to_le_bytes())?;
    sink.write_all(&(w.len() as u64).to_le_bytes())?;
    sink.write_all(&[2u8])?;
    for i in 0..w.len() {
        for v in [w.x[i], w.y[i]] {
            sink.write_all(&v.re.to_le_bytes())?;
            sink.write_all(&v.im.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Read back a waveform written by [`dump_waveform`].
pub fn load_waveform<R: Read>(source: &mut R) -> std::io::Result<SampledWaveform> {
    let mut f8 = [0u8; 8];
    source.read_exact(&mut f8)?;
    let sample_rate = f64::from_le_bytes(f8);
    source.read_exact(&mut f8)?;
    let n = u64::from_le_bytes(f8) as usize;
    let mut pols = [0u8; 1];
    source.read_exact(&mut pols)?;
    let n_pols = pols[0] as usize;
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        for pol in 0..n_pols {
            source.read_exact(&mut f8)?;
            let re = f64::from_le_bytes(f8);
            source.read_exact(&mut f8)?;
            let im = f64::from_le_bytes(f8);
            let v = Complex64::new(re, im);
            if pol == 0 {
                x[i] = v;
            } else {
                y[i] = v;
            }
        }
    }
    let mut w = SampledWaveform::new(x, y, sample_rate)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()))?;
    w.t0 = 0.0;
    Ok(w)
}

/// FFT-based autocorrelation of the composite pulse, sampled at lags kT,
/// used by tests against the Nyquist criterion.
pub fn aliased_autocorrelation(pulse: &SampledPulse, max_lag: usize) -> Vec<f64> {
    let sps = (pulse.sample_rate * pulse.symbol_interval).round() as usize;
    let dt = 1.0 / pulse.sample_rate;
    let n = pulse.samples.len();
    (0..=max_lag)
        .map(|lag| {
            let shift = lag * sps;
            let mut acc = 0.0;
            for i in shift..n {
                acc += pulse.samples[i] * pulse.samples[i - shift];
            }
            acc * dt
        })
        .collect()
}
