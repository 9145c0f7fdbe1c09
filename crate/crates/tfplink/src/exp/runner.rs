//! Pipeline wiring: symbols -> transmitter -> fiber -> receiver ->
//! detection -> IR/SE (and optionally the coded turbo loop), one result
//! row per operating point.

use super::config::{
    CodeConfig, ExperimentConfig, Profile, PulseKind, RxBandwidth, Sweepable, SystemKind,
};
use super::results::ResultRow;
use crate::codedloop::{
    measure_ber, Interleaver, ParityCheck, TurboConfig, TurboOutcome,
};
use crate::error::{Error, Result};
use crate::fiberlink::{backpropagate, propagate_link, LinkSpec, SsfmControl};
use crate::infomax::{
    estimate_ir, grid_points, snr_calibrate, GridPoint, IRResult, OperatingPoint, SweepMode,
};
use crate::isidet::{
    channel_shorten, effective_memory, ungerboeck_taps, FilterTaps, ShortenerSolution,
    UngerboeckModel,
};
use crate::rxfront::{duobinary_shape, ffe_equalize, front_end, gvd_compensate, mf_target,
    FfeState, RxConfig};
use crate::sigkit::{
    bits_to_symbols, derive_rng, make_constellation, random_bits, Constellation, SampledWaveform,
    SeedDomain,
};
use crate::txchain::{
    apply_gaussian_filter, assemble_superchannel, make_pulse, shape_carrier, CarrierPlan,
    OpticalFilterSpec, PulseSpec, SampledPulse,
};
use num_complex::Complex64;
use rayon::prelude::*;

/// Sequence budget after profile scaling, in symbols of the evaluated
/// carrier (one bit per quadrature per symbol times bits_per_pam).
#[derive(Debug, Clone, Copy)]
pub struct SequencePlan {
    pub training_symbols: usize,
    pub data_symbols: usize,
    pub block_symbols: usize,
}

impl SequencePlan {
    pub fn total(&self) -> usize {
        self.training_symbols + self.data_symbols
    }
}

/// Resolved per-run parameters shared by every grid point.
#[derive(Debug, Clone)]
pub struct RunPlan {
    pub system: SystemKind,
    pub constellation: Constellation,
    pub n_carriers: usize,
    pub symbol_interval: f64,
    pub sequence: SequencePlan,
    pub detector_memory: usize,
    pub pulse_kind: PulseKind,
    pub rolloff: f64,
    pub rx_bandwidth: RxBandwidth,
    pub dbp: bool,
    pub ssfm: SsfmControl,
    pub seed: u64,
    pub ci_target: f64,
    pub oversampling: Option<usize>,
}

/// Desk scaling factors (documented in the README): data bits /9,
/// training bits /5, block bits fixed at 10k, carriers capped at 3.
fn scaled_sequence(cfg: &ExperimentConfig, profile: Profile, bits_per_pam: usize) -> SequencePlan {
    let (data_bits, training_bits, block_bits) = match profile {
        Profile::Full => (
            cfg.sequence.data_bits,
            cfg.sequence.training_bits,
            cfg.sequence.block_bits,
        ),
        Profile::Desk => (
            (cfg.sequence.data_bits / 9).max(20_000),
            (cfg.sequence.training_bits / 5).max(4_000),
            cfg.sequence.block_bits.min(10_000),
        ),
    };
    SequencePlan {
        training_symbols: training_bits / bits_per_pam,
        data_symbols: data_bits / bits_per_pam,
        block_symbols: (block_bits / bits_per_pam).max(1000),
    }
}

/// Build the run plan from a validated config.
pub fn make_plan(cfg: &ExperimentConfig, profile: Profile) -> Result<RunPlan> {
    cfg.validate()?;
    let constellation = make_constellation(cfg.modulation);
    let bits_per_pam = constellation.bits_per_pam();
    let n_carriers = match profile {
        Profile::Full => cfg.carriers,
        Profile::Desk => cfg.carriers.min(3),
    };
    let ssfm = SsfmControl {
        max_step_km: 1.0,
        max_nl_phase_rad: match profile {
            Profile::Full => 3e-3,
            Profile::Desk => 0.05,
        },
        seed: cfg.seed,
    };
    Ok(RunPlan {
        system: cfg.system,
        constellation,
        n_carriers,
        symbol_interval: cfg.symbol_interval()?,
        sequence: scaled_sequence(cfg, profile, bits_per_pam),
        detector_memory: cfg.detector_memory_resolved(),
        pulse_kind: cfg.pulse.kind,
        rolloff: cfg.pulse.rolloff.unwrap_or(0.2),
        rx_bandwidth: cfg.rx_bandwidth,
        dbp: cfg.dbp,
        ssfm,
        seed: cfg.seed,
        ci_target: profile.ci_target(),
        oversampling: cfg.oversampling,
    })
}

fn pulse_spec(plan: &RunPlan) -> PulseSpec {
    match plan.pulse_kind {
        PulseKind::Nrz => PulseSpec::Nrz,
        PulseKind::Rz50 => PulseSpec::Rz50,
        PulseKind::Rrc => PulseSpec::Rrc {
            rolloff: plan.rolloff,
        },
    }
}

/// Simulation oversampling for one grid point: covers the occupied band
/// plus margin for nonlinear spectral broadening, never below the 8
/// samples/symbol the pulse generator needs, rounded up to a multiple of
/// 4 so RZ50 edges and 2x decimation stay exact.
fn pick_oversampling(plan: &RunPlan, link: &LinkSpec, point: &GridPoint) -> usize {
    if let Some(sps) = plan.oversampling {
        return sps.max(8);
    }
    let nonlinear = link.spans.iter().any(|s| s.gamma_w_km > 0.0);
    let occupied = (plan.n_carriers as f64 - 1.0) * point.f_norm + point.b_norm;
    let margin = if nonlinear { 2.0 * point.b_norm + 1.0 } else { 1.0 };
    let needed = (occupied + margin).ceil() as usize;
    needed.max(8).div_ceil(4) * 4
}

fn rx_bandwidth_norm(plan: &RunPlan, point: &GridPoint) -> f64 {
    match plan.rx_bandwidth {
        RxBandwidth::Fixed(v) => v,
        // TFP optimizes with B_R tracking B; other systems pin it in
        // their presets, so Auto simply follows B there too.
        RxBandwidth::Auto => point.b_norm,
    }
}

/// The aggregate pulse h(t): shaping pulse through both optical filters,
/// normalized to unit energy. Sampled at the simulation rate.
fn aggregate_pulse(
    pulse: &SampledPulse,
    tx: &OpticalFilterSpec,
    rx: &OpticalFilterSpec,
    sps: usize,
) -> Result<Vec<f64>> {
    // long buffer so circular filtering tails die out
    let window_symbols = 64.max(pulse.samples.len() / sps * 2 + 8);
    let n = window_symbols * sps;
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let center = n / 2;
    let start = center - pulse.center;
    for (j, &v) in pulse.samples.iter().enumerate() {
        x[start + j] = Complex64::new(v, 0.0);
    }
    let mut w = SampledWaveform::new(x.clone(), x, pulse.sample_rate)?;
    w = apply_gaussian_filter(&w, tx)?;
    w = apply_gaussian_filter(&w, rx)?;
    let dt = 1.0 / pulse.sample_rate;
    let energy: f64 = w.x.iter().map(|v| v.norm_sqr()).sum::<f64>() * dt;
    if energy <= 0.0 {
        return Err(Error::PulseEnergy { energy });
    }
    let scale = 1.0 / energy.sqrt();
    Ok(w.x.iter().map(|v| v.re * scale).collect())
}

/// Per-polarization receiver output plus what detection needs to know.
pub struct CarrierObservation {
    /// Symbol-rate MF-domain sequences, one per polarization.
    pub y: [Vec<Complex64>; 2],
    /// Transmitted symbol indices, one per polarization.
    pub tx_symbols: [Vec<usize>; 2],
    /// Unit-g0 Ungerboeck model estimated at the receiver.
    pub model: UngerboeckModel,
    /// Analytic accumulated ASE PSD (W/Hz per polarization).
    pub n0_analytic: f64,
}

/// Transmit symbol sources for every carrier.
struct TxSymbols {
    per_carrier: Vec<[Vec<usize>; 2]>,
}

fn draw_symbols(
    plan: &RunPlan,
    total_symbols: usize,
    coded: Option<&CodedSetup>,
    center: usize,
) -> Result<TxSymbols> {
    let c = &plan.constellation;
    let mut per_carrier = Vec::with_capacity(plan.n_carriers);
    for carrier in 0..plan.n_carriers {
        let mut pols: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
        for (pol, out) in pols.iter_mut().enumerate() {
            let mut rng = derive_rng(
                plan.seed,
                SeedDomain::DataBits,
                (carrier as u64) << 8 | pol as u64,
            );
            let bits = random_bits(&mut rng, total_symbols * c.bits_per_symbol);
            let mut symbols = bits_to_symbols(&bits, c)?;
            if let Some(setup) = coded {
                if carrier == center {
                    setup.overwrite_data_symbols(plan, pol, &mut symbols)?;
                }
            }
            *out = symbols;
        }
        per_carrier.push(pols);
    }
    Ok(TxSymbols { per_carrier })
}

/// Everything fixed about the coded transmission: code, encoder,
/// interleaver, and the encoded codewords per polarization.
pub struct CodedSetup {
    pub h: ParityCheck,
    pub interleaver: Interleaver,
    pub turbo: TurboConfig,
    pub codewords: [Vec<Vec<u8>>; 2],
    pub symbols_per_codeword: usize,
}

impl CodedSetup {
    pub fn build(code: &CodeConfig, plan: &RunPlan) -> Result<Self> {
        let h = match code.source.as_str() {
            "toy-r45" => ParityCheck::bundled_toy(),
            "hamming74" => ParityCheck::hamming74(),
            other => {
                let path = other.trim_start_matches("alist:");
                let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                    path: path.into(),
                    source,
                })?;
                ParityCheck::from_alist(&text)?
            }
        };
        let n = h.n_vars();
        let q = plan.constellation.bits_per_symbol;
        if n % q != 0 {
            return Err(Error::Config(format!(
                "codeword length {n} not divisible by {q} bits/symbol"
            )));
        }
        let symbols_per_codeword = n / q;
        let n_codewords = plan.sequence.data_symbols / symbols_per_codeword;
        if n_codewords == 0 {
            return Err(Error::Config(format!(
                "data region too short for one {n}-bit codeword"
            )));
        }
        let encoder = h.encoder()?;
        let interleaver = Interleaver::new(n, plan.seed ^ 0x1d);
        let mut codewords: [Vec<Vec<u8>>; 2] = [Vec::new(), Vec::new()];
        for (pol, list) in codewords.iter_mut().enumerate() {
            let mut rng = derive_rng(plan.seed, SeedDomain::DataBits, 0xC0DE00 | pol as u64);
            for _ in 0..n_codewords {
                let info = random_bits(&mut rng, encoder.k());
                list.push(encoder.encode(&info)?);
            }
        }
        Ok(Self {
            h,
            interleaver,
            turbo: TurboConfig {
                max_iterations: code.turbo_iterations,
                early_stop: true,
                inner_iterations: code.inner_iterations,
                ..Default::default()
            },
            codewords,
            symbols_per_codeword,
        })
    }

    fn overwrite_data_symbols(
        &self,
        plan: &RunPlan,
        pol: usize,
        symbols: &mut [usize],
    ) -> Result<()> {
        let c = &plan.constellation;
        let start = plan.sequence.training_symbols;
        for (cw_idx, cw) in self.codewords[pol].iter().enumerate() {
            let chan_bits = self.interleaver.scatter(cw);
            let mapped = bits_to_symbols(&chan_bits, c)?;
            let offset = start + cw_idx * self.symbols_per_codeword;
            symbols[offset..offset + mapped.len()].copy_from_slice(&mapped);
        }
        Ok(())
    }
}

/// Run transmitter, link, and the per-carrier receiver front half for one
/// grid point; returns the center carrier's MF-domain observation.
pub fn receive_center_carrier(
    plan: &RunPlan,
    link: &LinkSpec,
    point: GridPoint,
    point_index: u64,
    coded: Option<&CodedSetup>,
) -> Result<CarrierObservation> {
    receive_carrier(plan, link, point, point_index, coded, None)
}

/// As [`receive_center_carrier`], detecting an arbitrary carrier index
/// (performance evaluation normally uses the center one, which sees the
/// most inter-carrier interference).
pub fn receive_carrier(
    plan: &RunPlan,
    link: &LinkSpec,
    point: GridPoint,
    point_index: u64,
    coded: Option<&CodedSetup>,
    carrier_override: Option<usize>,
) -> Result<CarrierObservation> {
    let t = plan.symbol_interval;
    let c = &plan.constellation;
    let f_hz = point.f_norm / t;
    let b_hz = point.b_norm / t;
    let b_r_hz = rx_bandwidth_norm(plan, &point) / t;
    let p_c = 10f64.powf((point.power_dbm - 30.0) / 10.0);
    let sps = pick_oversampling(plan, link, &point);
    let sample_rate = sps as f64 / t;
    let total_symbols = plan.sequence.total();

    let pulse = make_pulse(&pulse_spec(plan), t, sample_rate)?;
    let tx_filter = OpticalFilterSpec::new(4, b_hz)?;
    let rx_filter = OpticalFilterSpec::new(4, b_r_hz)?;
    let plan_carriers =
        CarrierPlan::synchronized(plan.n_carriers, f_hz, t, p_c)?;
    let center = carrier_override.unwrap_or_else(|| plan_carriers.center_carrier());
    if center >= plan.n_carriers {
        return Err(Error::CarrierOutOfPlan {
            index: center,
            n_carriers: plan.n_carriers,
        });
    }

    let tx = draw_symbols(plan, total_symbols, coded, center)?;
    let carriers: Vec<SampledWaveform> = tx
        .per_carrier
        .iter()
        .map(|pols| shape_carrier(&pols[0], &pols[1], c, &pulse, &tx_filter))
        .collect::<Result<_>>()?;
    let superchannel = assemble_superchannel(&carriers, &plan_carriers, b_hz)?;

    let mut ctrl = plan.ssfm;
    ctrl.seed = plan
        .seed
        .wrapping_add(point_index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let (after_link, n0_analytic) = propagate_link(&superchannel, link, &ctrl)?;

    let compensated = if plan.dbp {
        backpropagate(&after_link, link, &ctrl)?
    } else {
        gvd_compensate(&after_link, link)
    };

    let rx_cfg = RxConfig {
        rx_filter,
        samples_per_symbol: 2,
        carrier_index: center,
    };
    let baseband = front_end(&compensated, &plan_carriers, &rx_cfg)?;

    // receiver-side channel knowledge: aggregate pulse and its taps;
    // keep lags down to 1e-6 relative so the folded spectrum stays PSD
    let h_agg = aggregate_pulse(&pulse, &tx_filter, &rx_filter, sps)?;
    let raw = ungerboeck_taps(&h_agg, sps, 1.0 / sample_rate, 24, 1.0)?;
    let g0 = raw.taps()[0];
    let taps_unit: Vec<f64> = raw.taps().iter().map(|g| g / g0).collect();
    let probe = UngerboeckModel::new(taps_unit.clone(), 1.0)?;
    let memory = effective_memory(&probe, 1e-6).max(1);
    let taps: Vec<f64> = taps_unit[..=memory].to_vec();

    // matched-filter targets from the known symbols
    let points = |seq: &[usize]| -> Vec<Complex64> {
        seq.iter().map(|&s| c.point(s)).collect()
    };
    let tx_x = points(&tx.per_carrier[center][0]);
    let tx_y = points(&tx.per_carrier[center][1]);
    let ref_x = mf_target(&tx_x, &taps);
    let ref_y = mf_target(&tx_y, &taps);

    let mut ffe = FfeState::new();
    let (y_x, y_y) = ffe_equalize(
        &baseband,
        &mut ffe,
        (&ref_x, &ref_y),
        plan.sequence.training_symbols,
    )?;

    // effective noise level from the training residual (covers ASE plus
    // residual nonlinear distortion)
    let est_lo = plan.sequence.training_symbols / 2;
    let est_hi = plan.sequence.training_symbols;
    let mut resid = 0.0;
    for k in est_lo..est_hi {
        resid += (y_x[k] - ref_x[k]).norm_sqr() + (y_y[k] - ref_y[k]).norm_sqr();
    }
    let n0_eff = (resid / (2.0 * (est_hi - est_lo) as f64) / 2.0).max(1e-9);

    let model = UngerboeckModel::new(taps, n0_eff)?;
    Ok(CarrierObservation {
        y: [y_x, y_y],
        tx_symbols: [
            tx.per_carrier[center][0].clone(),
            tx.per_carrier[center][1].clone(),
        ],
        model,
        n0_analytic,
    })
}

/// Least-squares duobinary fit: scale A and residual variance v of the
/// model y'_k = A (x_k + x_{k-1})/2 + n over the training region.
fn duobinary_solution(
    y_shaped: &[Complex64],
    tx: &[Complex64],
    training: usize,
) -> ShortenerSolution {
    let mut num = 0.0;
    let mut den = 0.0;
    let lo = training / 2;
    for k in lo..training {
        let d = (tx[k] + tx[k - 1]) / 2.0;
        num += (d.conj() * y_shaped[k]).re;
        den += d.norm_sqr();
    }
    let a = num / den.max(1e-30);
    let mut resid = 0.0;
    for k in lo..training {
        let d = (tx[k] + tx[k - 1]) / 2.0;
        resid += (y_shaped[k] - a * d).norm_sqr();
    }
    let v = (resid / (training - lo) as f64).max(1e-12);
    // Forney-form metric rewritten in Ungerboeck shape:
    // -|y - aFx|^2 / v  =>  H^r = (a/v) F, G^r = (a^2/v) F^H F
    ShortenerSolution {
        target: vec![a * a / (2.0 * v), a * a / (4.0 * v)],
        shortener: FilterTaps {
            taps: vec![a / (2.0 * v), a / (2.0 * v)],
            first_lag: 0,
        },
        memory: 1,
        objective_bits: 0.0,
    }
}

/// Detection plus IR estimation for one received carrier.
pub fn detect_and_score(
    plan: &RunPlan,
    obs: &CarrierObservation,
    point: GridPoint,
) -> Result<IRResult> {
    let c = &plan.constellation;
    let t = plan.symbol_interval;
    let training = plan.sequence.training_symbols;
    let block = plan.sequence.block_symbols;
    let mut estimates = Vec::new();
    for pol in 0..2 {
        let tx_points: Vec<Complex64> = obs.tx_symbols[pol]
            .iter()
            .map(|&s| c.point(s))
            .collect();
        let (y, sol): (Vec<Complex64>, ShortenerSolution) = match plan.system {
            SystemKind::RxDuobinary => {
                let shaped = duobinary_shape(&obs.y[pol]);
                let sol = duobinary_solution(&shaped, &tx_points, training);
                (shaped, sol)
            }
            _ => {
                let sol = channel_shorten(&obs.model, plan.detector_memory)?;
                (obs.y[pol].clone(), sol)
            }
        };
        let start = training - 2 * sol.memory;
        let est = estimate_ir(&tx_points[start..], &y[start..], &sol, c, block)?;
        estimates.push(est);
    }
    let f_hz = point.f_norm / t;
    let op = OperatingPoint {
        f_hz,
        b_hz: point.b_norm / t,
        b_r_hz: rx_bandwidth_norm(plan, &point) / t,
        power_per_carrier_w: 10f64.powf((point.power_dbm - 30.0) / 10.0),
        snr_db: if obs.n0_analytic > 0.0 {
            snr_calibrate(
                10f64.powf((point.power_dbm - 30.0) / 10.0),
                obs.n0_analytic,
                f_hz,
            )
        } else {
            f64::INFINITY
        },
    };
    Ok(IRResult::from_estimates(&estimates[0], &estimates[1], t, op))
}

/// Turbo-decode every codeword in the data region; returns aggregate BER.
pub fn decode_codewords(
    plan: &RunPlan,
    obs: &CarrierObservation,
    setup: &CodedSetup,
) -> Result<f64> {
    let c = &plan.constellation;
    let training = plan.sequence.training_symbols;
    let span = setup.symbols_per_codeword;
    let sol = channel_shorten(&obs.model, plan.detector_memory)?;
    let mut errors = 0usize;
    let mut bits = 0usize;
    for pol in 0..2 {
        for (cw_idx, cw) in setup.codewords[pol].iter().enumerate() {
            let start = training + cw_idx * span;
            let y = &obs.y[pol][start..start + span];
            let prefix_i: Vec<usize> = obs.tx_symbols[pol][start - sol.memory..start]
                .iter()
                .map(|&s| c.pam_indices(s).0)
                .collect();
            let prefix_q: Vec<usize> = obs.tx_symbols[pol][start - sol.memory..start]
                .iter()
                .map(|&s| c.pam_indices(s).1)
                .collect();
            let out: TurboOutcome = crate::codedloop::turbo_detect_decode(
                y,
                &sol,
                c,
                &setup.h,
                &setup.interleaver,
                &setup.turbo,
                Some((&prefix_i, &prefix_q)),
                Some(cw),
            )?;
            let (_, n) = measure_ber(&out.bits, cw)?;
            errors += out
                .bits
                .iter()
                .zip(cw)
                .filter(|(a, b)| a != b)
                .count();
            bits += n;
        }
    }
    Ok(errors as f64 / bits.max(1) as f64)
}

fn sweep_mode(cfg: &ExperimentConfig) -> SweepMode {
    match (cfg.system, cfg.f_spacing, cfg.tx_bandwidth) {
        (SystemKind::NyquistWdm, Sweepable::Sweep, _) => SweepMode::NyquistWdm,
        (_, Sweepable::Sweep, _) | (_, _, Sweepable::Sweep) => SweepMode::Tfp,
        _ => SweepMode::Fixed,
    }
}

fn effective_grid(cfg: &ExperimentConfig) -> crate::infomax::SweepGrid {
    let f_values = match cfg.f_spacing {
        Sweepable::Fixed(v) => vec![v],
        Sweepable::Sweep => cfg.sweep.f_values.clone(),
    };
    let b_values = match cfg.tx_bandwidth {
        Sweepable::Fixed(v) => vec![v],
        Sweepable::Sweep => cfg.sweep.b_values.clone(),
    };
    crate::infomax::SweepGrid {
        f_values,
        b_values,
        power_dbm: cfg.sweep.power_dbm.clone(),
    }
}

/// Evaluate one grid point end to end.
pub fn evaluate_point(
    plan: &RunPlan,
    link: &LinkSpec,
    point: GridPoint,
    point_index: u64,
    coded: Option<&CodedSetup>,
) -> Result<(IRResult, Option<f64>)> {
    let obs = receive_center_carrier(plan, link, point, point_index, coded)?;
    let ir = detect_and_score(plan, &obs, point)?;
    let ber = match coded {
        Some(setup) => Some(decode_codewords(plan, &obs, setup)?),
        None => None,
    };
    Ok((ir, ber))
}

/// Run a full experiment: every link distance and grid point, one result
/// row each. Per-point failures are recorded in the row status.
pub fn run_experiment(cfg: &ExperimentConfig, profile: Profile) -> Result<Vec<ResultRow>> {
    let plan = make_plan(cfg, profile)?;
    let base_link = cfg.link.build()?;
    let links: Vec<(Option<f64>, LinkSpec)> = match &cfg.distance_sweep_km {
        None => vec![(None, base_link)],
        Some(distances) => distances
            .iter()
            .map(|&d| {
                let span_km = base_link.spans[0].length_km;
                let count = (d / span_km).round().max(1.0) as usize;
                let link = LinkSpec {
                    spans: vec![base_link.spans[0]; count],
                    amp_gain_db: None,
                    noise_figure_db: base_link.noise_figure_db,
                    reference_wavelength_nm: base_link.reference_wavelength_nm,
                };
                (Some(span_km * count as f64), link)
            })
            .collect(),
    };
    let coded = match &cfg.code {
        Some(code) if code.enabled => Some(CodedSetup::build(code, &plan)?),
        _ => None,
    };
    let points = grid_points(&effective_grid(cfg), sweep_mode(cfg))?;

    let mut rows = Vec::new();
    for (link_idx, (distance, link)) in links.iter().enumerate() {
        let link_rows: Vec<ResultRow> = points
            .par_iter()
            .enumerate()
            .map(|(pt_idx, &point)| {
                let started = std::time::Instant::now();
                let index = (link_idx as u64) << 32 | pt_idx as u64;
                let outcome = evaluate_point(&plan, link, point, index, coded.as_ref());
                let runtime_s = started.elapsed().as_secs_f64();
                match outcome {
                    Ok((ir, ber)) => ResultRow {
                        scenario: cfg.scenario.clone(),
                        distance_km: *distance,
                        snr_db: ir.operating_point.snr_db,
                        launch_dbm_per_carrier: point.power_dbm,
                        f_norm: point.f_norm,
                        b_norm: point.b_norm,
                        b_r_norm: rx_bandwidth_norm(&plan, &point),
                        ir_x: ir.ir_x,
                        ir_y: ir.ir_y,
                        se: ir.se,
                        ci_rel: ir.ci_rel,
                        ber,
                        runtime_s,
                        seed: plan.seed,
                        status: "ok".into(),
                    },
                    Err(e) => ResultRow {
                        scenario: cfg.scenario.clone(),
                        distance_km: *distance,
                        snr_db: f64::NAN,
                        launch_dbm_per_carrier: point.power_dbm,
                        f_norm: point.f_norm,
                        b_norm: point.b_norm,
                        b_r_norm: rx_bandwidth_norm(&plan, &point),
                        ir_x: 0.0,
                        ir_y: 0.0,
                        se: 0.0,
                        ci_rel: f64::NAN,
                        ber: None,
                        runtime_s,
                        seed: plan.seed,
                        status: format!("error: {e}"),
                    },
                }
            })
            .collect();
        rows.extend(link_rows);
    }
    Ok(rows)
}
