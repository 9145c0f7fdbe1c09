//! Simulation-based achievable information rate and spectral efficiency
//! estimation, SNR calibration, and the (F, B) packing sweep.
//!
//! The IR estimator follows the standard simulation method for channels
//! with memory: per block, log2 q(y|x) comes from the auxiliary-channel
//! metric of the transmitted sequence and log2 q_p(y) from the detector's
//! forward recursion. Both use the same unnormalized metric, so all
//! proportionality constants cancel in the difference.

use crate::error::{Error, Result};
use crate::isidet::{bcjr_pam, pam_metric, Boundary, ShortenerSolution};
use crate::sigkit::Constellation;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

/// Information-rate estimate for one polarization.
#[derive(Debug, Clone)]
pub struct IrEstimate {
    /// Bits per channel use (complex symbol), clipped below at 0.
    pub ir: f64,
    /// Relative half-width of the 95% confidence interval over blocks.
    pub ci_rel: f64,
    pub blocks: usize,
    pub per_block: Vec<f64>,
}

/// Operating point attached to every result.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OperatingPoint {
    pub f_hz: f64,
    pub b_hz: f64,
    pub b_r_hz: f64,
    pub power_per_carrier_w: f64,
    pub snr_db: f64,
}

/// Achievable-rate result for one operating point, both polarizations.
#[derive(Debug, Clone)]
pub struct IRResult {
    /// Bits per channel use, per polarization.
    pub ir_x: f64,
    pub ir_y: f64,
    /// b/s/Hz, both polarizations aggregated.
    pub se: f64,
    pub ci_rel: f64,
    pub blocks: usize,
    pub operating_point: OperatingPoint,
}

impl IRResult {
    pub fn from_estimates(
        x: &IrEstimate,
        y: &IrEstimate,
        symbol_interval: f64,
        op: OperatingPoint,
    ) -> Self {
        Self {
            ir_x: x.ir,
            ir_y: y.ir,
            se: spectral_efficiency(x.ir, y.ir, op.f_hz, symbol_interval),
            ci_rel: x.ci_rel.max(y.ci_rel),
            blocks: x.blocks + y.blocks,
            operating_point: op,
        }
    }
}

/// Estimate the achievable IR of one polarization from aligned transmitted
/// symbols and received MF-domain observations.
///
/// The first `2 * memory` symbols act as known guards; every block is
/// detected with its preceding symbols as a known trellis prefix, removing
/// edge ambiguity. Blocks evaluate concurrently and aggregate in index
/// order, so results are reproducible.
pub fn estimate_ir(
    x: &[Complex64],
    y: &[Complex64],
    s: &ShortenerSolution,
    c: &Constellation,
    block_len: usize,
) -> Result<IrEstimate> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if block_len < 1000 {
        return Err(Error::InvalidParameter(format!(
            "block length must be >= 1000 symbols, got {block_len}"
        )));
    }
    let memory = s.memory;
    let guard = 2 * memory;
    if x.len() < guard + block_len {
        return Err(Error::InvalidParameter(format!(
            "sequence too short: {} symbols for guard {guard} + block {block_len}",
            x.len()
        )));
    }

    // prefilter once, split into quadratures and PAM level indices
    let z = s.filter_observations(y);
    let zi: Vec<f64> = z.iter().map(|v| v.re).collect();
    let zq: Vec<f64> = z.iter().map(|v| v.im).collect();
    let xi: Vec<f64> = x.iter().map(|v| v.re).collect();
    let xq: Vec<f64> = x.iter().map(|v| v.im).collect();
    let levels = &c.pam_levels;
    let level_index = |v: f64| -> usize {
        levels
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                (v - **a).abs().partial_cmp(&(v - **b).abs()).unwrap()
            })
            .map(|(i, _)| i)
            .unwrap()
    };
    let ii: Vec<usize> = xi.iter().map(|&v| level_index(v)).collect();
    let qi: Vec<usize> = xq.iter().map(|&v| level_index(v)).collect();

    let n_blocks = (x.len() - guard) / block_len;
    if n_blocks == 0 {
        return Err(Error::InvalidParameter("no complete blocks".into()));
    }

    let ln2 = std::f64::consts::LN_2;
    let per_block: Vec<f64> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let start = guard + b * block_len;
            let end = start + block_len;
            let mut bits = 0.0;
            for (z_arr, x_arr, idx_arr) in [(&zi, &xi, &ii), (&zq, &xq, &qi)] {
                // numerator: ln q(y|x) of the transmitted sequence;
                // denominator: ln sum_x' q(y|x') P(x') from the detector
                let num = pam_metric(z_arr, x_arr, &s.target, start..end);
                let prefix = &idx_arr[start - memory..start];
                let post = bcjr_pam(
                    &z_arr[start..end],
                    &s.target,
                    levels,
                    None,
                    Boundary::Known(prefix),
                )
                .expect("validated inputs");
                bits += (num - post.log_qp) / ln2;
            }
            bits / block_len as f64
        })
        .collect();

    let mean_raw: f64 = per_block.iter().sum::<f64>() / n_blocks as f64;
    let ir = mean_raw.max(0.0);
    let ci_rel = if n_blocks >= 2 && mean_raw > 0.0 {
        let var: f64 = per_block
            .iter()
            .map(|v| (v - mean_raw).powi(2))
            .sum::<f64>()
            / (n_blocks as f64 - 1.0);
        1.96 * (var / n_blocks as f64).sqrt() / mean_raw
    } else {
        f64::INFINITY
    };
    Ok(IrEstimate {
        ir,
        ci_rel,
        blocks: n_blocks,
        per_block,
    })
}

/// SE = (ir_x + ir_y) / (F T), b/s/Hz: the IR per time-frequency slot,
/// both polarizations counted.
pub fn spectral_efficiency(ir_x: f64, ir_y: f64, f_hz: f64, symbol_interval: f64) -> f64 {
    (ir_x + ir_y) / (f_hz * symbol_interval)
}

/// SNR per carrier: P_c / (2 N0 F), in dB.
pub fn snr_calibrate(power_per_carrier_w: f64, n0_w_hz: f64, f_hz: f64) -> f64 {
    10.0 * (power_per_carrier_w / (2.0 * n0_w_hz * f_hz)).log10()
}

/// Normalized SE difference against a reference system.
pub fn delta_vs_reference(eta: f64, eta_ref: f64) -> f64 {
    (eta - eta_ref) / eta_ref
}

/// Sweep grid over normalized frequency spacing, filter bandwidth, and
/// per-carrier launch power.
#[derive(Debug, Clone, Serialize)]
pub struct SweepGrid {
    /// F values normalized to 1/T.
    pub f_values: Vec<f64>,
    /// Transmit filter bandwidths normalized to 1/T.
    pub b_values: Vec<f64>,
    /// Launch power per carrier, dBm.
    pub power_dbm: Vec<f64>,
}

/// Packing-mode constraint applied while sweeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    /// Free (F, B) grid with B_R = B.
    Tfp,
    /// Orthogonal baseline: F = B and F >= 1/T.
    NyquistWdm,
    /// Fixed published operating point(s); grid taken as-is.
    Fixed,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridPoint {
    pub f_norm: f64,
    pub b_norm: f64,
    pub power_dbm: f64,
}

/// One evaluated grid point; failures are recorded, not fatal.
#[derive(Debug, Clone)]
pub struct SurfacePoint {
    pub point: GridPoint,
    pub outcome: std::result::Result<IRResult, String>,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    /// Maximum achievable SE over the grid.
    pub eta_max: f64,
    pub best: Option<(GridPoint, IRResult)>,
    pub surface: Vec<SurfacePoint>,
}

/// Expand the grid according to the sweep mode.
pub fn grid_points(grid: &SweepGrid, mode: SweepMode) -> Result<Vec<GridPoint>> {
    if grid.f_values.is_empty() && mode != SweepMode::NyquistWdm {
        return Err(Error::InvalidParameter("empty F grid".into()));
    }
    if grid.b_values.is_empty() || grid.power_dbm.is_empty() {
        return Err(Error::InvalidParameter("empty sweep grid".into()));
    }
    let mut points = Vec::new();
    match mode {
        SweepMode::Tfp | SweepMode::Fixed => {
            for &f in &grid.f_values {
                for &b in &grid.b_values {
                    for &p in &grid.power_dbm {
                        points.push(GridPoint {
                            f_norm: f,
                            b_norm: b,
                            power_dbm: p,
                        });
                    }
                }
            }
        }
        SweepMode::NyquistWdm => {
            for &b in &grid.b_values {
                if b < 1.0 {
                    return Err(Error::InvalidParameter(format!(
                        "Nyquist-WDM requires F = B >= 1/T, got {b}"
                    )));
                }
                for &p in &grid.power_dbm {
                    points.push(GridPoint {
                        f_norm: b,
                        b_norm: b,
                        power_dbm: p,
                    });
                }
            }
        }
    }
    Ok(points)
}

/// Maximize SE over the grid: runs `evaluate` on every point (concurrently,
/// deterministic aggregation) and returns the surface plus the argmax.
pub fn optimize_fb<F>(grid: &SweepGrid, mode: SweepMode, evaluate: F) -> Result<SweepOutcome>
where
    F: Fn(GridPoint) -> Result<IRResult> + Sync,
{
    let points = grid_points(grid, mode)?;
    let surface: Vec<SurfacePoint> = points
        .into_par_iter()
        .map(|p| SurfacePoint {
            point: p,
            outcome: evaluate(p).map_err(|e| e.to_string()),
        })
        .collect();
    let mut best: Option<(GridPoint, IRResult)> = None;
    for sp in &surface {
        if let Ok(r) = &sp.outcome {
            if best.as_ref().map(|(_, b)| r.se > b.se).unwrap_or(true) {
                best = Some((sp.point, r.clone()));
            }
        }
    }
    Ok(SweepOutcome {
        eta_max: best.as_ref().map(|(_, r)| r.se).unwrap_or(0.0),
        best,
        surface,
    })
}
