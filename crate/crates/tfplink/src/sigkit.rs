//! Core value types: constellations, bit/symbol sequences, sampled
//! waveforms, and deterministic pseudo-random generation.
//!
//! Everything here is an immutable value after construction and safe to
//! share across workers. Generation is a pure function of (seed, lengths,
//! format): identical inputs produce bit-identical outputs.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// Supported square modulation formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModulationFormat {
    Qpsk,
    Qam16,
    Qam64,
    Qam256,
}

impl ModulationFormat {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            ModulationFormat::Qpsk => 2,
            ModulationFormat::Qam16 => 4,
            ModulationFormat::Qam64 => 6,
            ModulationFormat::Qam256 => 8,
        }
    }
}

/// Normalized square constellation with its per-quadrature PAM alphabet.
///
/// `points[label]` is the complex symbol whose Gray bit label equals
/// `label`; the first half of the label addresses the in-phase level, the
/// second half the quadrature level. `pam_levels` are ascending and scaled
/// so the complex constellation has unit average energy.
#[derive(Debug, Clone)]
pub struct Constellation {
    pub points: Vec<Complex64>,
    pub bits_per_symbol: usize,
    pub pam_levels: Vec<f64>,
    format: ModulationFormat,
}

/// Canonical reflected Gray code: label -> level index.
fn gray_decode(mut label: u32) -> u32 {
    let mut out = 0;
    while label != 0 {
        out ^= label;
        label >>= 1;
    }
    out
}

/// Level index -> Gray label.
fn gray_encode(index: u32) -> u32 {
    index ^ (index >> 1)
}

impl Constellation {
    pub fn format(&self) -> ModulationFormat {
        self.format
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    /// Number of PAM levels per quadrature (sqrt of constellation size).
    pub fn pam_size(&self) -> usize {
        self.pam_levels.len()
    }

    pub fn bits_per_pam(&self) -> usize {
        self.bits_per_symbol / 2
    }

    /// Split a symbol index into (I, Q) PAM level indices.
    pub fn pam_indices(&self, symbol: usize) -> (usize, usize) {
        let q_bits = self.bits_per_pam();
        let i_label = (symbol >> q_bits) as u32;
        let q_label = (symbol & ((1 << q_bits) - 1)) as u32;
        (gray_decode(i_label) as usize, gray_decode(q_label) as usize)
    }

    /// Inverse of [`pam_indices`](Self::pam_indices).
    pub fn symbol_from_pam(&self, i_index: usize, q_index: usize) -> usize {
        let q_bits = self.bits_per_pam();
        ((gray_encode(i_index as u32) as usize) << q_bits) | gray_encode(q_index as u32) as usize
    }

    pub fn point(&self, symbol: usize) -> Complex64 {
        self.points[symbol]
    }

    /// Gray bit label of one PAM level index, per quadrature.
    pub fn pam_label(&self, level_index: usize) -> u32 {
        gray_encode(level_index as u32)
    }
}

/// Build a Gray-mapped square constellation with unit average energy.
pub fn make_constellation(format: ModulationFormat) -> Constellation {
    let q = format.bits_per_symbol();
    let m_pam = 1usize << (q / 2);
    // Uniform odd-integer levels +/-1, +/-3, ..., scaled so E{|x|^2} = 1.
    // For m levels per axis the unscaled complex energy is 2(m^2-1)/3.
    let energy = 2.0 * ((m_pam * m_pam - 1) as f64) / 3.0;
    let scale = 1.0 / energy.sqrt();
    let pam_levels: Vec<f64> = (0..m_pam)
        .map(|i| (2.0 * i as f64 - (m_pam as f64 - 1.0)) * scale)
        .collect();
    let m = m_pam * m_pam;
    let mut points = vec![Complex64::new(0.0, 0.0); m];
    let q_bits = q / 2;
    for label in 0..m {
        let i_idx = gray_decode((label >> q_bits) as u32) as usize;
        let q_idx = gray_decode((label & (m_pam - 1)) as u32) as usize;
        points[label] = Complex64::new(pam_levels[i_idx], pam_levels[q_idx]);
    }
    Constellation {
        points,
        bits_per_symbol: q,
        pam_levels,
        format,
    }
}

/// Map a bit sequence onto constellation symbol indices (Gray, per quadrature).
pub fn bits_to_symbols(bits: &[u8], c: &Constellation) -> Result<Vec<usize>> {
    let q = c.bits_per_symbol;
    if bits.len() % q != 0 {
        return Err(Error::BitLength {
            len: bits.len(),
            bits_per_symbol: q,
        });
    }
    Ok(bits
        .chunks(q)
        .map(|chunk| {
            chunk
                .iter()
                .fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize)
        })
        .collect())
}

/// Inverse of [`bits_to_symbols`].
pub fn symbols_to_bits(symbols: &[usize], c: &Constellation) -> Vec<u8> {
    let q = c.bits_per_symbol;
    let mut bits = Vec::with_capacity(symbols.len() * q);
    for &s in symbols {
        for k in (0..q).rev() {
            bits.push(((s >> k) & 1) as u8);
        }
    }
    bits
}

/// Split complex symbols into their I and Q PAM components.
///
/// Every value must lie on the square grid of `c` (within a small numeric
/// tolerance); recombining I + jQ reproduces the input exactly.
pub fn split_iq(symbols: &[Complex64], c: &Constellation) -> Result<(Vec<f64>, Vec<f64>)> {
    let tol = 1e-9;
    let mut i_out = Vec::with_capacity(symbols.len());
    let mut q_out = Vec::with_capacity(symbols.len());
    for s in symbols {
        let on_grid = |v: f64| c.pam_levels.iter().any(|&l| (l - v).abs() < tol);
        if !on_grid(s.re) || !on_grid(s.im) {
            return Err(Error::NotSquareConstellation {
                value: format!("{s}"),
            });
        }
        i_out.push(s.re);
        q_out.push(s.im);
    }
    Ok((i_out, q_out))
}

/// Symbol indices for `n_symbols` symbols per carrier and polarization.
///
/// Layout is `[carrier][polarization][symbol index]`; the training prefix
/// occupies the first `training_len` symbols of every sequence and is
/// reproducible from the seed alone.
#[derive(Debug, Clone)]
pub struct SymbolFrame {
    symbols: Vec<[Vec<usize>; 2]>,
    pub n_symbols: usize,
    pub training_len: usize,
}

impl SymbolFrame {
    pub fn n_carriers(&self) -> usize {
        self.symbols.len()
    }

    pub fn sequence(&self, carrier: usize, pol: usize) -> &[usize] {
        &self.symbols[carrier][pol]
    }
}

/// Stream identifiers for deriving independent substreams from one master
/// seed. ChaCha streams are counter-addressed, so any (domain, index) pair
/// yields a reproducible generator regardless of evaluation order.
#[derive(Debug, Clone, Copy)]
pub enum SeedDomain {
    DataBits,
    AmplifierNoise,
    Interleaver,
    Oracle,
}

impl SeedDomain {
    fn id(self) -> u64 {
        match self {
            SeedDomain::DataBits => 1,
            SeedDomain::AmplifierNoise => 2,
            SeedDomain::Interleaver => 3,
            SeedDomain::Oracle => 4,
        }
    }
}

/// Deterministic generator for (master seed, domain, index).
pub fn derive_rng(master: u64, domain: SeedDomain, index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(master);
    rng.set_stream((domain.id() << 48) ^ index);
    rng
}

/// Generate i.u.d. bits.
pub fn random_bits(rng: &mut ChaCha12Rng, n: usize) -> Vec<u8> {
    (0..n).map(|_| rng.random_range(0..2u8)).collect()
}

/// Generate a frame of i.u.d. symbols for every carrier and polarization.
pub fn random_frame(
    master_seed: u64,
    n_carriers: usize,
    n_symbols: usize,
    training_len: usize,
    c: &Constellation,
) -> SymbolFrame {
    let mut symbols = Vec::with_capacity(n_carriers);
    for carrier in 0..n_carriers {
        let mut pols: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
        for (pol, seq) in pols.iter_mut().enumerate() {
            let mut rng = derive_rng(
                master_seed,
                SeedDomain::DataBits,
                (carrier as u64) << 8 | pol as u64,
            );
            let bits = random_bits(&mut rng, n_symbols * c.bits_per_symbol);
            *seq = bits_to_symbols(&bits, c).expect("length is a multiple by construction");
        }
        symbols.push(pols);
    }
    SymbolFrame {
        symbols,
        n_symbols,
        training_len,
    }
}

/// Dual-polarization complex baseband signal on a uniform time grid.
///
/// Sample amplitudes are in sqrt(W), so [`power`](Self::power) is in watts
/// and combines directly with launch powers and the fiber nonlinear index.
#[derive(Debug, Clone)]
pub struct SampledWaveform {
    pub x: Vec<Complex64>,
    pub y: Vec<Complex64>,
    pub sample_rate: f64,
    pub t0: f64,
    pub center_freq_offset: f64,
}

impl SampledWaveform {
    pub fn new(x: Vec<Complex64>, y: Vec<Complex64>, sample_rate: f64) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: y.len(),
            });
        }
        if !(sample_rate > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sample rate must be positive, got {sample_rate}"
            )));
        }
        let w = Self {
            x,
            y,
            sample_rate,
            t0: 0.0,
            center_freq_offset: 0.0,
        };
        if !w.power().is_finite() {
            return Err(Error::NonFinite {
                context: "waveform construction".into(),
            });
        }
        Ok(w)
    }

    pub fn zeros(len: usize, sample_rate: f64) -> Self {
        Self {
            x: vec![Complex64::new(0.0, 0.0); len],
            y: vec![Complex64::new(0.0, 0.0); len],
            sample_rate,
            t0: 0.0,
            center_freq_offset: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Mean power over both polarizations, in watts.
    pub fn power(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        let sum: f64 = self
            .x
            .iter()
            .zip(&self.y)
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .sum();
        sum / self.len() as f64
    }

    /// Total energy (J), assuming the buffer spans its full duration.
    pub fn energy(&self) -> f64 {
        self.power() * self.len() as f64 / self.sample_rate
    }

    pub fn scale(&mut self, factor: f64) {
        for v in self.x.iter_mut().chain(self.y.iter_mut()) {
            *v *= factor;
        }
    }

    pub fn assert_finite(&self, context: &str) -> Result<()> {
        let ok = self
            .x
            .iter()
            .chain(self.y.iter())
            .all(|v| v.re.is_finite() && v.im.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::NonFinite {
                context: context.into(),
            })
        }
    }
}
