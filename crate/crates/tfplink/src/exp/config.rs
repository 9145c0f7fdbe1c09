//! Experiment configuration: a single TOML file with flat dotted keys.
//! Unknown keys are errors, so typos fail loudly instead of silently
//! falling back to defaults.

use crate::error::{Error, Result};
use crate::fiberlink::{FiberSpan, LinkSpec};
use crate::sigkit::ModulationFormat;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Transmission system selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    Tfp,
    NyquistWdm,
    RxDuobinary,
}

/// Run profile: `Full` mirrors the published sequence budgets, `Desk`
/// shrinks them by fixed factors (data bits /9, training bits /5, blocks
/// to 10k bits, carriers capped at 3) and loosens the CI target from 2%
/// to 5%.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Desk,
    Full,
}

impl Profile {
    pub fn ci_target(self) -> f64 {
        match self {
            Profile::Desk => 0.05,
            Profile::Full => 0.02,
        }
    }
}

/// A value that is either fixed (normalized to 1/T) or swept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sweepable {
    Fixed(f64),
    Sweep,
}

impl Serialize for Sweepable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Sweepable::Fixed(v) => s.serialize_f64(*v),
            Sweepable::Sweep => s.serialize_str("sweep"),
        }
    }
}

impl<'de> Deserialize<'de> for Sweepable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Sweepable::Fixed(v)),
            Raw::Text(t) if t == "sweep" => Ok(Sweepable::Sweep),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "expected a number or \"sweep\", got {t:?}"
            ))),
        }
    }
}

/// Receive bandwidth: explicit, or `auto` (TFP: B_R = B; otherwise B).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RxBandwidth {
    Auto,
    Fixed(f64),
}

impl Serialize for RxBandwidth {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RxBandwidth::Fixed(v) => s.serialize_f64(*v),
            RxBandwidth::Auto => s.serialize_str("auto"),
        }
    }
}

impl<'de> Deserialize<'de> for RxBandwidth {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(RxBandwidth::Fixed(v)),
            Raw::Text(t) if t == "auto" => Ok(RxBandwidth::Auto),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "expected a number or \"auto\", got {t:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub kind: PulseKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rolloff: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PulseKind {
    Rz50,
    Nrz,
    Rrc,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SpanConfig {
    pub length_km: f64,
    pub dispersion_ps_nm_km: f64,
    pub attenuation_db_km: f64,
    pub gamma_w_km: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    /// `table1` (the 15-span SMF link) or `uniform100`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// Number of spans when repeating a uniform preset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spans: Option<Vec<SpanConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_figure_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_wavelength_nm: Option<f64>,
    /// Scale factor on every span length (desk-scaled links).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length_scale: Option<f64>,
    /// Override: zero the nonlinear index everywhere.
    #[serde(default)]
    pub force_linear: bool,
}

/// Span lengths of the 15-span production link.
pub const TABLE1_SPAN_KM: [f64; 15] = [
    70.8, 75.5, 55.1, 52.1, 40.1, 67.0, 53.2, 50.0, 80.3, 79.1, 53.6, 75.1, 90.3, 54.2, 99.4,
];

pub const SMF_DISPERSION: f64 = 16.63; // ps/nm/km
pub const SMF_ATTENUATION: f64 = 0.23; // dB/km
pub const SMF_GAMMA: f64 = 1.3; // 1/(W km)

impl LinkConfig {
    pub fn build(&self) -> Result<LinkSpec> {
        let smf = |length_km: f64| FiberSpan {
            length_km,
            dispersion_ps_nm_km: SMF_DISPERSION,
            attenuation_db_km: SMF_ATTENUATION,
            gamma_w_km: SMF_GAMMA,
        };
        let (mut spans, default_nf) = match (&self.preset, &self.spans) {
            (Some(name), None) => match name.as_str() {
                "table1" => (
                    TABLE1_SPAN_KM.iter().map(|&l| smf(l)).collect::<Vec<_>>(),
                    6.0,
                ),
                "uniform100" => {
                    let count = self.span_count.unwrap_or(10);
                    (vec![smf(100.0); count], 5.0)
                }
                other => {
                    return Err(Error::Config(format!(
                        "unknown link preset {other:?}; expected table1 or uniform100"
                    )))
                }
            },
            (None, Some(spans)) => (
                spans
                    .iter()
                    .map(|s| FiberSpan {
                        length_km: s.length_km,
                        dispersion_ps_nm_km: s.dispersion_ps_nm_km,
                        attenuation_db_km: s.attenuation_db_km,
                        gamma_w_km: s.gamma_w_km,
                    })
                    .collect(),
                6.0,
            ),
            _ => {
                return Err(Error::Config(
                    "link needs exactly one of `preset` or `spans`".into(),
                ))
            }
        };
        if let Some(scale) = self.length_scale {
            if !(scale > 0.0) {
                return Err(Error::Config("link.length_scale must be positive".into()));
            }
            for s in spans.iter_mut() {
                s.length_km *= scale;
            }
        }
        if self.force_linear {
            for s in spans.iter_mut() {
                s.gamma_w_km = 0.0;
            }
        }
        let link = LinkSpec {
            spans,
            amp_gain_db: None,
            noise_figure_db: self.noise_figure_db.unwrap_or(default_nf),
            reference_wavelength_nm: self.reference_wavelength_nm.unwrap_or(1550.0),
        };
        link.validate()?;
        Ok(link)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SequenceConfig {
    /// Data bits per quadrature on the evaluated carrier.
    pub data_bits: usize,
    /// Training bits per quadrature (FFE adaptation prefix).
    pub training_bits: usize,
    /// IR estimation block size, bits per quadrature.
    pub block_bits: usize,
    /// Known guard symbols conditioning every detection block
    /// (default 2 L_r).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard_symbols: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub f_values: Vec<f64>,
    #[serde(default)]
    pub b_values: Vec<f64>,
    pub power_dbm: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CodeConfig {
    #[serde(default)]
    pub enabled: bool,
    /// `toy-r45`, `hamming74`, or `alist:<path>`.
    pub source: String,
    #[serde(default = "default_turbo_iterations")]
    pub turbo_iterations: usize,
    #[serde(default = "default_inner_iterations")]
    pub inner_iterations: usize,
}

fn default_turbo_iterations() -> usize {
    50
}

fn default_inner_iterations() -> usize {
    20
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema")]
    pub schema: u32,
    /// Scenario identifier used in result rows and figure files.
    pub scenario: String,
    pub system: SystemKind,
    pub modulation: ModulationFormat,
    pub carriers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bit_rate_per_carrier_gbps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baud_gbd: Option<f64>,
    pub pulse: PulseConfig,
    /// Carrier spacing normalized to 1/T, or "sweep".
    pub f_spacing: Sweepable,
    /// Transmit filter 3-dB bandwidth normalized to 1/T, or "sweep".
    pub tx_bandwidth: Sweepable,
    /// Receive filter bandwidth normalized to 1/T, or "auto".
    pub rx_bandwidth: RxBandwidth,
    /// Detector memory L_r (defaults: TFP 4, Nyquist-WDM 2, duobinary 1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector_memory: Option<usize>,
    #[serde(default)]
    pub dbp: bool,
    pub link: LinkConfig,
    pub sequence: SequenceConfig,
    pub sweep: SweepConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code: Option<CodeConfig>,
    /// Distances (km) for SE-vs-distance sweeps over uniform links.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_sweep_km: Option<Vec<f64>>,
    /// Simulation oversampling (samples per symbol); default picked from
    /// the occupied bandwidth, doubled under nonlinear propagation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oversampling: Option<usize>,
    pub seed: u64,
}

fn default_schema() -> u32 {
    1
}

impl ExperimentConfig {
    /// Symbol interval from exactly one of bit rate or baud rate.
    pub fn symbol_interval(&self) -> Result<f64> {
        let bits_per_symbol_pm = 2.0 * self.modulation.bits_per_symbol() as f64;
        match (self.bit_rate_per_carrier_gbps, self.baud_gbd) {
            (Some(rb), None) => Ok(bits_per_symbol_pm / (rb * 1e9)),
            (None, Some(baud)) => Ok(1.0 / (baud * 1e9)),
            _ => Err(Error::Config(
                "give exactly one of bit_rate_per_carrier_gbps or baud_gbd".into(),
            )),
        }
    }

    /// Detector memory after system defaults.
    pub fn detector_memory_resolved(&self) -> usize {
        self.detector_memory.unwrap_or(match self.system {
            SystemKind::Tfp => 4,
            SystemKind::NyquistWdm => 2,
            SystemKind::RxDuobinary => 1,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != 1 {
            return Err(Error::Config(format!(
                "unsupported schema version {}",
                self.schema
            )));
        }
        if self.carriers == 0 {
            return Err(Error::Config("carriers must be >= 1".into()));
        }
        self.symbol_interval()?;
        if self.scenario.is_empty() {
            return Err(Error::Config("scenario id must not be empty".into()));
        }
        if let PulseKind::Rrc = self.pulse.kind {
            match self.pulse.rolloff {
                Some(a) if a > 0.0 && a <= 1.0 => {}
                _ => {
                    return Err(Error::Config(
                        "rrc pulse needs rolloff in (0, 1]".into(),
                    ))
                }
            }
        }
        if self.system == SystemKind::NyquistWdm {
            if let Sweepable::Fixed(f) = self.f_spacing {
                if f < 1.0 {
                    return Err(Error::Config(format!(
                        "Nyquist-WDM requires F >= 1/T, got {f}"
                    )));
                }
            }
        }
        match self.f_spacing {
            Sweepable::Sweep if self.sweep.f_values.is_empty() => {
                return Err(Error::Config(
                    "f_spacing = \"sweep\" needs sweep.f_values".into(),
                ))
            }
            _ => {}
        }
        match self.tx_bandwidth {
            Sweepable::Sweep if self.sweep.b_values.is_empty() => {
                return Err(Error::Config(
                    "tx_bandwidth = \"sweep\" needs sweep.b_values".into(),
                ))
            }
            _ => {}
        }
        if self.sweep.power_dbm.is_empty() {
            return Err(Error::Config("sweep.power_dbm must not be empty".into()));
        }
        if self.sequence.data_bits == 0 || self.sequence.block_bits == 0 {
            return Err(Error::Config("sequence lengths must be positive".into()));
        }
        if let Some(code) = &self.code {
            if code.enabled
                && !(code.source == "toy-r45"
                    || code.source == "hamming74"
                    || code.source.starts_with("alist:"))
            {
                return Err(Error::Config(format!(
                    "unknown code source {:?}; expected toy-r45, hamming74 or alist:<path>",
                    code.source
                )));
            }
        }
        self.link.build()?;
        Ok(())
    }

    /// Serialize back to TOML (config echo).
    pub fn echo(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

/// Parse, validate, and echo-check a config from TOML text.
pub fn load_config_str(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig =
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Load a config file; the path may also name a bundled preset.
pub fn load_config(path: &str) -> Result<ExperimentConfig> {
    let text = if let Some(preset) = bundled_preset(path) {
        preset.to_string()
    } else {
        std::fs::read_to_string(Path::new(path)).map_err(|source| Error::Io {
            path: path.into(),
            source,
        })?
    };
    load_config_str(&text)
}

/// Apply `key.path=value` overrides to raw TOML text before parsing.
pub fn apply_overrides(text: &str, overrides: &[String]) -> Result<String> {
    let mut root: toml::Value =
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    for item in overrides {
        let (key, value) = item.split_once('=').ok_or_else(|| {
            Error::Config(format!("override {item:?} is not key=value"))
        })?;
        let parsed: toml::Value = match value.parse::<i64>() {
            Ok(v) => toml::Value::Integer(v),
            Err(_) => match value.parse::<f64>() {
                Ok(v) => toml::Value::Float(v),
                Err(_) => match value {
                    "true" => toml::Value::Boolean(true),
                    "false" => toml::Value::Boolean(false),
                    other if other.starts_with('[') => toml::from_str::<toml::Value>(&format!(
                        "v = {other}"
                    ))
                    .map_err(|e| Error::Config(format!("override {item:?}: {e}")))?
                    .get("v")
                    .cloned()
                    .unwrap(),
                    other => toml::Value::String(other.to_string()),
                },
            },
        };
        let mut cursor = &mut root;
        let parts: Vec<&str> = key.split('.').collect();
        for part in &parts[..parts.len() - 1] {
            cursor = cursor
                .as_table_mut()
                .ok_or_else(|| Error::Config(format!("{key}: not a table")))?
                .entry(part.to_string())
                .or_insert_with(|| toml::Value::Table(Default::default()));
        }
        cursor
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("{key}: not a table")))?
            .insert(parts[parts.len() - 1].to_string(), parsed);
    }
    toml::to_string(&root).map_err(|e| Error::Config(e.to_string()))
}

/// Bundled scenario presets, one per published system.
pub fn bundled_preset(name: &str) -> Option<&'static str> {
    match name {
        "tfp-qpsk" => Some(include_str!("../../presets/tfp_qpsk.toml")),
        "tfp-qpsk-equal-baud" => Some(include_str!("../../presets/tfp_qpsk_equal_baud.toml")),
        "nwdm-16qam" => Some(include_str!("../../presets/nwdm_16qam.toml")),
        "duobinary-16qam" => Some(include_str!("../../presets/duobinary_16qam.toml")),
        "seopt-16qam" => Some(include_str!("../../presets/seopt_16qam.toml")),
        "seopt-64qam" => Some(include_str!("../../presets/seopt_64qam.toml")),
        "seopt-256qam" => Some(include_str!("../../presets/seopt_256qam.toml")),
        "coded-tfp-qpsk" => Some(include_str!("../../presets/coded_tfp_qpsk.toml")),
        _ => None,
    }
}

pub fn preset_names() -> &'static [&'static str] {
    &[
        "tfp-qpsk",
        "tfp-qpsk-equal-baud",
        "nwdm-16qam",
        "duobinary-16qam",
        "seopt-16qam",
        "seopt-64qam",
        "seopt-256qam",
        "coded-tfp-qpsk",
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_tfp_config_with_table1() {
        let text = r#"
            scenario = "tfp-test"
            system = "tfp"
            modulation = "qpsk"
            carriers = 8
            bit_rate_per_carrier_gbps = 140.0
            pulse.kind = "rz50"
            f_spacing = 0.43
            tx_bandwidth = 0.325
            rx_bandwidth = "auto"
            link.preset = "table1"
            sequence.data_bits = 900000
            sequence.training_bits = 100000
            sequence.block_bits = 50000
            sweep.power_dbm = [0.0]
            seed = 1
        "#;
        let cfg = load_config_str(text).unwrap();
        let link = cfg.link.build().unwrap();
        assert_eq!(link.spans.len(), 15);
        assert_eq!(link.spans[0].length_km, 70.8);
        assert_eq!(link.spans[14].length_km, 99.4);
        assert_eq!(link.noise_figure_db, 6.0);
        // 140 Gb/s PM-QPSK = 35 GBd
        assert!((cfg.symbol_interval().unwrap() - 1.0 / 35e9).abs() < 1e-22);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"
            scenario = "x"
            system = "tfp"
            modulation = "qpsk"
            carriers = 1
            baud_gbd = 28.0
            pulse.kind = "rz50"
            f_spacing = 0.5
            tx_bandwidth = 0.4
            rx_bandwidth = "auto"
            link.preset = "table1"
            sequence.data_bits = 1000
            sequence.training_bits = 100
            sequence.block_bits = 1000
            sweep.power_dbm = [0.0]
            seed = 1
            made_up_key = 3
        "#;
        let err = load_config_str(text).unwrap_err();
        assert!(err.to_string().contains("made_up_key"), "{err}");
    }

    #[test]
    fn nyquist_wdm_spacing_constraint() {
        let text = r#"
            scenario = "nwdm"
            system = "nyquist-wdm"
            modulation = "qam16"
            carriers = 3
            bit_rate_per_carrier_gbps = 140.0
            pulse.kind = "nrz"
            f_spacing = 0.9
            tx_bandwidth = 1.1
            rx_bandwidth = 1.0
            link.preset = "table1"
            sequence.data_bits = 1000
            sequence.training_bits = 100
            sequence.block_bits = 1000
            sweep.power_dbm = [0.0]
            seed = 1
        "#;
        let err = load_config_str(text).unwrap_err();
        assert!(err.to_string().contains("F >= 1/T"), "{err}");
    }

    #[test]
    fn exactly_one_rate_given() {
        let text = r#"
            scenario = "x"
            system = "tfp"
            modulation = "qpsk"
            carriers = 1
            bit_rate_per_carrier_gbps = 140.0
            baud_gbd = 35.0
            pulse.kind = "rz50"
            f_spacing = 0.5
            tx_bandwidth = 0.4
            rx_bandwidth = "auto"
            link.preset = "table1"
            sequence.data_bits = 1000
            sequence.training_bits = 100
            sequence.block_bits = 1000
            sweep.power_dbm = [0.0]
            seed = 1
        "#;
        assert!(load_config_str(text).is_err());
    }

    #[test]
    fn all_presets_load_and_round_trip() {
        for name in preset_names() {
            let cfg = load_config(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            let echo = cfg.echo();
            let back = load_config_str(&echo).unwrap_or_else(|e| panic!("{name} echo: {e}"));
            assert_eq!(back, cfg, "{name} does not round-trip");
        }
    }

    #[test]
    fn nwdm_preset_matches_published_bandwidths() {
        let cfg = load_config("nwdm-16qam").unwrap();
        assert_eq!(cfg.system, SystemKind::NyquistWdm);
        assert_eq!(cfg.pulse.kind, PulseKind::Nrz);
        assert_eq!(cfg.f_spacing, Sweepable::Fixed(1.0));
        assert_eq!(cfg.tx_bandwidth, Sweepable::Fixed(1.1));
        assert_eq!(cfg.rx_bandwidth, RxBandwidth::Fixed(1.0));
        assert_eq!(cfg.detector_memory_resolved(), 2);
    }

    #[test]
    fn overrides_apply() {
        let base = r#"
            scenario = "x"
            system = "tfp"
            modulation = "qpsk"
            carriers = 4
            baud_gbd = 28.0
            pulse.kind = "rz50"
            f_spacing = 0.5
            tx_bandwidth = 0.4
            rx_bandwidth = "auto"
            link.preset = "table1"
            sequence.data_bits = 1000
            sequence.training_bits = 100
            sequence.block_bits = 1000
            sweep.power_dbm = [0.0]
            seed = 1
        "#;
        let text =
            apply_overrides(base, &["carriers=2".into(), "sweep.power_dbm=[1.0,2.0]".into()])
                .unwrap();
        let cfg = load_config_str(&text).unwrap();
        assert_eq!(cfg.carriers, 2);
        assert_eq!(cfg.sweep.power_dbm, vec![1.0, 2.0]);
    }
}
