//! Per-carrier receive chain: optical receive filter and ideal coherent
//! downconversion, static GVD compensation, a 2x2 decision-directed
//! adaptive FFE trained toward the matched-filter-output target, and the
//! receiver-side duobinary shaping used by the comparison system.

use crate::dsp;
use crate::error::{Error, Result};
use crate::fiberlink::LinkSpec;
use crate::sigkit::SampledWaveform;
use crate::txchain::{apply_gaussian_filter, CarrierPlan, OpticalFilterSpec};
use num_complex::Complex64;

/// Receive-side configuration for one carrier.
#[derive(Debug, Clone)]
pub struct RxConfig {
    pub rx_filter: OpticalFilterSpec,
    pub samples_per_symbol: usize,
    pub carrier_index: usize,
}

/// Ideal opto-electronic front end: downconvert the selected carrier to
/// baseband, apply the Gaussian receive filter, and resample to
/// `samples_per_symbol` per symbol. Perfect LO, no phase noise.
pub fn front_end(w: &SampledWaveform, plan: &CarrierPlan, cfg: &RxConfig) -> Result<SampledWaveform> {
    if cfg.carrier_index >= plan.n_carriers {
        return Err(Error::CarrierOutOfPlan {
            index: cfg.carrier_index,
            n_carriers: plan.n_carriers,
        });
    }
    if cfg.samples_per_symbol < 2 {
        return Err(Error::Undersampled {
            samples_per_symbol: cfg.samples_per_symbol as f64,
            min: 2,
        });
    }
    let offset = plan.carrier_offset_hz(cfg.carrier_index);
    let mut base = w.clone();
    if offset != 0.0 {
        for i in 0..base.len() {
            let t = base.t0 + i as f64 / base.sample_rate;
            let rot = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * offset * t);
            base.x[i] *= rot;
            base.y[i] *= rot;
        }
    }
    let filtered = apply_gaussian_filter(&base, &cfg.rx_filter)?;

    // integer decimation onto the t = k T / sps_out grid
    let sps_in = (w.sample_rate * plan.symbol_interval).round() as usize;
    if sps_in % cfg.samples_per_symbol != 0 {
        return Err(Error::InvalidParameter(format!(
            "cannot resample {sps_in} samples/symbol to {}",
            cfg.samples_per_symbol
        )));
    }
    let decim = sps_in / cfg.samples_per_symbol;
    let start = (-filtered.t0 * filtered.sample_rate).round() as i64;
    let n_in = filtered.len();
    let n_out = n_in / decim;
    let pick = |src: &[Complex64]| -> Vec<Complex64> {
        (0..n_out)
            .map(|j| {
                let idx = (start + (j * decim) as i64).rem_euclid(n_in as i64) as usize;
                src[idx]
            })
            .collect()
    };
    let mut out = SampledWaveform::new(
        pick(&filtered.x),
        pick(&filtered.y),
        w.sample_rate / decim as f64,
    )?;
    out.t0 = 0.0;
    out.center_freq_offset = offset;
    Ok(out)
}

/// Static chromatic-dispersion equalizer: one frequency-domain all-pass
/// per polarization inverting the link's accumulated GVD phase.
pub fn gvd_compensate(w: &SampledWaveform, link: &LinkSpec) -> SampledWaveform {
    let total_beta2 = link.total_beta2_s2();
    if total_beta2 == 0.0 {
        return w.clone();
    }
    let response: Vec<Complex64> = dsp::angular_freqs(w.len(), w.sample_rate)
        .into_iter()
        .map(|om| Complex64::from_polar(1.0, -total_beta2 / 2.0 * om * om))
        .collect();
    let mut out = w.clone();
    dsp::apply_freq_response(&mut out.x, &response);
    dsp::apply_freq_response(&mut out.y, &response);
    out
}

/// Matched-filter-output target sequence: y_k = sum_i g_i x_{k-i} with
/// Hermitian taps (g_{-i} = g_i) and zero boundary.
pub fn mf_target(symbols: &[Complex64], taps: &[f64]) -> Vec<Complex64> {
    let k_len = symbols.len() as isize;
    let l = taps.len() as isize - 1;
    (0..k_len)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in -l..=l {
                let j = k - i;
                if j >= 0 && j < k_len {
                    acc += taps[i.unsigned_abs()] * symbols[j as usize];
                }
            }
            acc
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FfeMode {
    Training,
    DecisionDirected,
}

/// 2x2 butterfly fractionally-spaced adaptive equalizer state.
#[derive(Debug, Clone)]
pub struct FfeState {
    pub taps: [Vec<Complex64>; 4], // xx, xy, yx, yy
    pub step: f64,
    pub mode: FfeMode,
    n_taps: usize,
}

impl FfeState {
    /// 25 taps, normalized LMS step 1e-3.
    pub fn new() -> Self {
        Self::with_params(25, 1e-3)
    }

    pub fn with_params(n_taps: usize, step: f64) -> Self {
        let mut empty = vec![Complex64::new(0.0, 0.0); n_taps];
        empty[n_taps / 2] = Complex64::new(1.0, 0.0);
        let zero = vec![Complex64::new(0.0, 0.0); n_taps];
        Self {
            taps: [empty.clone(), zero.clone(), zero, empty],
            step,
            mode: FfeMode::Training,
            n_taps,
        }
    }

    pub fn n_taps(&self) -> usize {
        self.n_taps
    }
}

impl Default for FfeState {
    fn default() -> Self {
        Self::new()
    }
}

/// Run the fractionally spaced (2 samples/symbol) 2x2 LMS equalizer.
///
/// `reference` carries the matched-filter-output targets per polarization:
/// the equalizer learns the MF response and does NOT remove the
/// intentional ISI. The first `training_len` symbols adapt in training
/// mode; afterwards the state switches to decision-directed and keeps
/// adapting against the remaining reference entries (detector feedback or
/// known data in simulation), freezing if the reference runs out.
pub fn ffe_equalize(
    input: &SampledWaveform,
    state: &mut FfeState,
    reference: (&[Complex64], &[Complex64]),
    training_len: usize,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let n_taps = state.n_taps;
    let half = n_taps as isize / 2;
    let n_in = input.len() as isize;
    let n_sym = (n_in / 2) as usize;
    let (ref_x, ref_y) = reference;
    if ref_x.len() < training_len.min(n_sym) || ref_y.len() < training_len.min(n_sym) {
        return Err(Error::LengthMismatch {
            left: ref_x.len(),
            right: training_len,
        });
    }

    let mut out_x = Vec::with_capacity(n_sym);
    let mut out_y = Vec::with_capacity(n_sym);
    let mut ux = vec![Complex64::new(0.0, 0.0); n_taps];
    let mut uy = vec![Complex64::new(0.0, 0.0); n_taps];
    let target_power: f64 = if training_len > 0 {
        let t = training_len.min(ref_x.len());
        ref_x[..t].iter().map(|v| v.norm_sqr()).sum::<f64>() / t as f64
    } else {
        1.0
    };
    let mut recent_power = 0.0;
    let mut recent_count = 0usize;

    state.mode = FfeMode::Training;
    for k in 0..n_sym {
        // window centered on the symbol instant, circular indexing
        let center = 2 * k as isize;
        for j in 0..n_taps {
            let idx = (center + j as isize - half).rem_euclid(n_in) as usize;
            ux[j] = input.x[idx];
            uy[j] = input.y[idx];
        }
        let mut yx = Complex64::new(0.0, 0.0);
        let mut yy = Complex64::new(0.0, 0.0);
        for j in 0..n_taps {
            yx += state.taps[0][j] * ux[j] + state.taps[1][j] * uy[j];
            yy += state.taps[2][j] * ux[j] + state.taps[3][j] * uy[j];
        }
        out_x.push(yx);
        out_y.push(yy);

        recent_power += yx.norm_sqr() + yy.norm_sqr();
        recent_count += 1;
        if recent_count == 256 {
            let avg = recent_power / (2.0 * recent_count as f64);
            if !avg.is_finite() || avg > 1e3 * target_power {
                return Err(Error::FfeDiverged {
                    output: avg,
                    target: target_power,
                });
            }
            recent_power = 0.0;
            recent_count = 0;
        }

        if k >= training_len {
            state.mode = FfeMode::DecisionDirected;
        }
        let desired = if k < ref_x.len() {
            Some((ref_x[k], ref_y[k]))
        } else {
            None
        };
        if let Some((dx, dy)) = desired {
            let ex = dx - yx;
            let ey = dy - yy;
            let energy: f64 = ux.iter().chain(uy.iter()).map(|v| v.norm_sqr()).sum::<f64>()
                + 1e-12;
            let mu = state.step / energy * n_taps as f64;
            for j in 0..n_taps {
                let cx = ux[j].conj();
                let cy = uy[j].conj();
                state.taps[0][j] += mu * ex * cx;
                state.taps[1][j] += mu * ex * cy;
                state.taps[2][j] += mu * ey * cx;
                state.taps[3][j] += mu * ey * cy;
            }
        }
    }
    Ok((out_x, out_y))
}

/// Receiver-side duobinary shaping: y'_k = (y_k + y_{k-1}) / 2.
pub fn duobinary_shape(y: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(y.len());
    let mut prev = Complex64::new(0.0, 0.0);
    for &v in y {
        out.push((v + prev) / 2.0);
        prev = v;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiberlink::{propagate_span, FiberSpan, SsfmControl};
    use crate::sigkit::{derive_rng, make_constellation, ModulationFormat, SeedDomain};
    use crate::txchain::{make_pulse, shape_carrier, PulseSpec};
    use rand::Rng;

    fn qpsk_carrier(
        seed: u64,
        n_sym: usize,
        sps: usize,
        bw_rel: f64,
    ) -> (SampledWaveform, Vec<Complex64>, Vec<Complex64>) {
        let c = make_constellation(ModulationFormat::Qpsk);
        let t = 1e-10;
        let frame = crate::sigkit::random_frame(seed, 1, n_sym, 0, &c);
        let pulse = make_pulse(&PulseSpec::Rz50, t, sps as f64 / t).unwrap();
        let filt = OpticalFilterSpec::new(4, bw_rel / t).unwrap();
        let w = shape_carrier(
            frame.sequence(0, 0),
            frame.sequence(0, 1),
            &c,
            &pulse,
            &filt,
        )
        .unwrap();
        let sx: Vec<Complex64> = frame.sequence(0, 0).iter().map(|&s| c.point(s)).collect();
        let sy: Vec<Complex64> = frame.sequence(0, 1).iter().map(|&s| c.point(s)).collect();
        (w, sx, sy)
    }

    #[test]
    fn front_end_wide_filter_is_transparent() {
        // narrow transmit filtering, very wide receive filter
        let (w, _, _) = qpsk_carrier(1, 512, 16, 1.0);
        let plan = CarrierPlan::synchronized(1, 1e10, 1e-10, 1e-3).unwrap();
        let cfg = RxConfig {
            rx_filter: OpticalFilterSpec::new(4, 7e10).unwrap(),
            samples_per_symbol: 16,
            carrier_index: 0,
        };
        let out = front_end(&w, &plan, &cfg).unwrap();
        // same grid (decim 1) up to circular shift by the pulse center
        let start = (-w.t0 * w.sample_rate).round() as usize;
        let mut expected = w.x.clone();
        expected.rotate_left(start);
        let err = dsp::nmse(&out.x, &expected);
        assert!(err < 1e-6, "NMSE {err}");
    }

    #[test]
    fn front_end_selects_carrier() {
        // three carriers; selecting the +1 offset must center its spectrum
        let c = make_constellation(ModulationFormat::Qpsk);
        let t = 1e-10;
        let pulse = make_pulse(&PulseSpec::Rz50, t, 32.0 / t).unwrap();
        let filt = OpticalFilterSpec::new(4, 0.5 / t).unwrap();
        let mut carriers = Vec::new();
        for seed in 10..13 {
            let frame = crate::sigkit::random_frame(seed, 1, 2048, 0, &c);
            carriers.push(
                shape_carrier(
                    frame.sequence(0, 0),
                    frame.sequence(0, 1),
                    &c,
                    &pulse,
                    &filt,
                )
                .unwrap(),
            );
        }
        let plan = CarrierPlan::synchronized(3, 0.8 / t, t, 1e-3).unwrap();
        let sup = crate::txchain::assemble_superchannel(&carriers, &plan, 0.5 / t).unwrap();
        let cfg = RxConfig {
            rx_filter: OpticalFilterSpec::new(4, 0.5 / t).unwrap(),
            samples_per_symbol: 4,
            carrier_index: 2,
        };
        let out = front_end(&sup, &plan, &cfg).unwrap();
        let (freqs, psd) = dsp::periodogram(&out.x, out.sample_rate, 1024);
        // spectral centroid near 0 relative to the symbol rate
        let total: f64 = psd.iter().sum();
        let centroid: f64 = freqs.iter().zip(&psd).map(|(f, p)| f * p).sum::<f64>() / total;
        assert!(
            centroid.abs() < 0.05 / t,
            "centroid {centroid} Hz vs symbol rate {}",
            1.0 / t
        );
    }

    #[test]
    fn front_end_bandlimits_to_rx_filter() {
        let (w, _, _) = qpsk_carrier(2, 4096, 16, 1.0);
        let t = 1e-10;
        let plan = CarrierPlan::synchronized(1, 1e10, t, 1e-3).unwrap();
        let cfg = RxConfig {
            rx_filter: OpticalFilterSpec::new(4, 0.7 / t).unwrap(),
            samples_per_symbol: 4,
            carrier_index: 0,
        };
        let out = front_end(&w, &plan, &cfg).unwrap();
        let (freqs, psd) = dsp::periodogram(&out.x, out.sample_rate, 2048);
        let bw = dsp::occupied_bandwidth_3db(&freqs, &psd);
        assert!(
            bw <= 0.75 / t,
            "-3 dB bandwidth {bw} exceeds 0.7/T = {}",
            0.7 / t
        );
    }

    #[test]
    fn front_end_rejects_bad_carrier() {
        let (w, _, _) = qpsk_carrier(3, 64, 16, 1.0);
        let plan = CarrierPlan::synchronized(1, 1e10, 1e-10, 1e-3).unwrap();
        let cfg = RxConfig {
            rx_filter: OpticalFilterSpec::new(4, 5e9).unwrap(),
            samples_per_symbol: 4,
            carrier_index: 1,
        };
        assert!(front_end(&w, &plan, &cfg).is_err());
    }

    #[test]
    fn gvd_compensation_inverts_linear_link() {
        let span = FiberSpan {
            length_km: 70.0,
            dispersion_ps_nm_km: 16.63,
            attenuation_db_km: 0.0,
            gamma_w_km: 0.0,
        };
        let link = LinkSpec {
            spans: vec![span; 3],
            amp_gain_db: Some(vec![0.0; 3]),
            noise_figure_db: 6.0,
            reference_wavelength_nm: 1550.0,
        };
        let (w, _, _) = qpsk_carrier(4, 1024, 16, 0.8);
        let ctrl = SsfmControl::default();
        let mut cur = w.clone();
        for s in &link.spans {
            cur = propagate_span(&cur, s, &ctrl, 1550.0).unwrap();
        }
        let rec = gvd_compensate(&cur, &link);
        let err = dsp::nmse(&rec.x, &w.x).max(dsp::nmse(&rec.y, &w.y));
        assert!(err < 1e-9, "NMSE {err}");
    }

    #[test]
    fn gvd_zero_length_is_identity() {
        let (w, _, _) = qpsk_carrier(5, 64, 16, 1.0);
        let link = LinkSpec::transparent(vec![], 6.0);
        let out = gvd_compensate(&w, &link);
        for (a, b) in out.x.iter().zip(&w.x) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn table1_total_dispersion() {
        let lengths = [
            70.8, 75.5, 55.1, 52.1, 40.1, 67.0, 53.2, 50.0, 80.3, 79.1, 53.6, 75.1, 90.3, 54.2,
            99.4,
        ];
        let spans: Vec<FiberSpan> = lengths
            .iter()
            .map(|&l| FiberSpan {
                length_km: l,
                dispersion_ps_nm_km: 16.63,
                attenuation_db_km: 0.23,
                gamma_w_km: 1.3,
            })
            .collect();
        let link = LinkSpec::transparent(spans, 6.0);
        let total_km: f64 = lengths.iter().sum();
        assert!((total_km - 995.8).abs() < 1e-9);
        let total_disp_ps_nm = 16.63 * total_km;
        // recover D*L from the beta2 sum
        let lambda = 1550e-9;
        let from_beta2 = -link.total_beta2_s2() * 2.0 * std::f64::consts::PI
            * crate::fiberlink::SPEED_OF_LIGHT
            / (lambda * lambda)
            * 1e3; // s/m -> ps/nm
        assert!(
            (from_beta2 - total_disp_ps_nm).abs() / total_disp_ps_nm < 1e-12,
            "{from_beta2} vs {total_disp_ps_nm}"
        );
    }

    #[test]
    fn ffe_converges_on_identity_channel() {
        let (w, sx, sy) = qpsk_carrier(6, 6000, 16, 4.0);
        let t = 1e-10;
        let plan = CarrierPlan::synchronized(1, 1e10, t, 1e-3).unwrap();
        let cfg = RxConfig {
            rx_filter: OpticalFilterSpec::new(4, 8e10).unwrap(),
            samples_per_symbol: 2,
            carrier_index: 0,
        };
        let rx = front_end(&w, &plan, &cfg).unwrap();
        // scale reference to the waveform's own amplitude
        let amp = (rx.power() / 2.0).sqrt() * 2f64.sqrt();
        let ref_x: Vec<Complex64> = sx.iter().map(|v| v * amp).collect();
        let ref_y: Vec<Complex64> = sy.iter().map(|v| v * amp).collect();
        let mut state = FfeState::new();
        let (ox, _oy) = ffe_equalize(&rx, &mut state, (&ref_x, &ref_y), 4000).unwrap();
        // steady-state excess MSE below the LMS bound mu * signal power
        let tail = 5000..6000;
        let mse: f64 = tail
            .clone()
            .map(|k| (ox[k] - ref_x[k]).norm_sqr())
            .sum::<f64>()
            / 1000.0;
        let sig_power = amp * amp;
        assert!(
            mse < state.step * sig_power * 10.0,
            "excess MSE {mse} vs bound {}",
            state.step * sig_power
        );
        assert_eq!(state.mode, FfeMode::DecisionDirected);
    }

    #[test]
    fn ffe_resolves_swapped_polarizations() {
        let (w, sx, sy) = qpsk_carrier(7, 6000, 16, 4.0);
        let t = 1e-10;
        let plan = CarrierPlan::synchronized(1, 1e10, t, 1e-3).unwrap();
        let cfg = RxConfig {
            rx_filter: OpticalFilterSpec::new(4, 8e10).unwrap(),
            samples_per_symbol: 2,
            carrier_index: 0,
        };
        let mut rx = front_end(&w, &plan, &cfg).unwrap();
        std::mem::swap(&mut rx.x, &mut rx.y);
        let amp = (rx.power() / 2.0).sqrt() * 2f64.sqrt();
        let ref_x: Vec<Complex64> = sx.iter().map(|v| v * amp).collect();
        let ref_y: Vec<Complex64> = sy.iter().map(|v| v * amp).collect();
        let mut state = FfeState::new();
        let (ox, oy) = ffe_equalize(&rx, &mut state, (&ref_x, &ref_y), 4000).unwrap();
        let mse_x: f64 = (5000..6000)
            .map(|k| (ox[k] - ref_x[k]).norm_sqr())
            .sum::<f64>()
            / 1000.0;
        let mse_y: f64 = (5000..6000)
            .map(|k| (oy[k] - ref_y[k]).norm_sqr())
            .sum::<f64>()
            / 1000.0;
        assert!(mse_x < 0.05 * amp * amp && mse_y < 0.05 * amp * amp);
        // butterfly must be anti-diagonal: cross taps dominate
        let energy = |taps: &[Complex64]| taps.iter().map(|v| v.norm_sqr()).sum::<f64>();
        assert!(energy(&state.taps[1]) > 10.0 * energy(&state.taps[0]));
        assert!(energy(&state.taps[2]) > 10.0 * energy(&state.taps[3]));
    }

    #[test]
    fn ffe_divergence_detected() {
        let mut w = SampledWaveform::zeros(8192, 2.0);
        let mut rng = derive_rng(8, SeedDomain::Oracle, 0);
        for v in w.x.iter_mut().chain(w.y.iter_mut()) {
            *v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        let ref_x = vec![Complex64::new(1e-6, 0.0); 4096];
        let ref_y = ref_x.clone();
        let mut state = FfeState::with_params(25, 1.9); // unstable step
        let result = ffe_equalize(&w, &mut state, (&ref_x, &ref_y), 4096);
        assert!(result.is_err());
    }

    #[test]
    fn duobinary_impulse_and_constants() {
        let one = Complex64::new(1.0, 0.0);
        let impulse = [one, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
        let out = duobinary_shape(&impulse);
        assert_eq!(out[0], one / 2.0);
        assert_eq!(out[1], one / 2.0);
        assert_eq!(out[2], Complex64::new(0.0, 0.0));

        let c = Complex64::new(0.7, -0.3);
        let constant = vec![c; 6];
        let out = duobinary_shape(&constant);
        for v in &out[1..] {
            assert!((v - c).norm() < 1e-15);
        }

        let alternating: Vec<Complex64> = (0..8)
            .map(|i| if i % 2 == 0 { one } else { -one })
            .collect();
        let out = duobinary_shape(&alternating);
        for v in &out[1..] {
            assert!(v.norm() < 1e-15);
        }
    }
}
