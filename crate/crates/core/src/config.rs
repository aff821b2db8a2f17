//! The single source of truth for a run: every model, noise, amplifier,
//! converter, and detector parameter in one serializable record, identified
//! by a stable content hash.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adc::AdcConfig;
use crate::afe::AfeConfig;
use crate::detect::DetectorConfig;
use crate::error::{Error, Result};
use crate::noise::NoiseConfig;
use crate::signal_model::CrpModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainConfig {
    /// Rate at which the analog chain is simulated before acquisition.
    pub source_rate_hz: f64,
    pub crp: CrpModel,
    pub noise: NoiseConfig,
    pub afe: AfeConfig,
    pub adc: AdcConfig,
    pub detector: DetectorConfig,
    /// Stimulus-to-detection pairing window for latency/accuracy metrics.
    pub matching_window_s: f64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            source_rate_hz: 1024.0,
            crp: CrpModel::default(),
            noise: NoiseConfig::default(),
            afe: AfeConfig::default(),
            adc: AdcConfig::default(),
            detector: DetectorConfig::default(),
            matching_window_s: 0.5,
        }
    }
}

impl ChainConfig {
    /// The bench operating point: the stock 50000 V/V chain padded by the
    /// input attenuation sub-circuit (80 dB) and biased so the resting
    /// baseline sits between the two detector thresholds. Saccades then
    /// swing tens of millivolts about 0.045 V, crossing 0.0500 V upward and
    /// 0.0400 V downward without touching the supply rails.
    pub fn fig6() -> Self {
        let mut config = ChainConfig::default();
        config.afe.input_attenuation = 1e-4;
        config.adc.input_offset_v = 0.045;
        config
    }

    /// Apply the named preset's fields on top of this config.
    pub fn apply_preset(&mut self, preset: Preset) {
        match preset {
            Preset::Fig6 => {
                let p = ChainConfig::fig6();
                self.afe.input_attenuation = p.afe.input_attenuation;
                self.adc.input_offset_v = p.adc.input_offset_v;
                self.detector = p.detector;
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.source_rate_hz.is_finite() || self.source_rate_hz <= 0.0 {
            return Err(Error::invalid_config("source_rate_hz", "must be > 0"));
        }
        self.crp.validate()?;
        self.noise.validate()?;
        self.afe.validate()?;
        self.adc.validate()?;
        self.detector.validate()?;
        if self.source_rate_hz < self.adc.sample_rate_hz {
            return Err(Error::invalid_config(
                "source_rate_hz",
                format!(
                    "must be >= the acquisition rate {} Hz",
                    self.adc.sample_rate_hz
                ),
            ));
        }
        if self.source_rate_hz <= 2.0 * self.afe.fc_lp_hz {
            return Err(Error::invalid_config(
                "source_rate_hz",
                format!(
                    "must exceed twice the low-pass cutoff {} Hz",
                    self.afe.fc_lp_hz
                ),
            ));
        }
        if !self.matching_window_s.is_finite() || self.matching_window_s <= 0.0 {
            return Err(Error::invalid_config("matching_window_s", "must be > 0"));
        }
        Ok(())
    }

    /// Canonical form: compact JSON with fields in schema order.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Stable digest of the canonical JSON; identifies a run.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let config: ChainConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        Self::from_json_str(&text)
    }
}

/// Named operating points selectable from the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig6,
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig6" => Ok(Preset::Fig6),
            other => Err(Error::invalid_config(
                "preset",
                format!("unknown preset {other:?}, expected `fig6`"),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        ChainConfig::default().validate().unwrap();
        ChainConfig::fig6().validate().unwrap();
    }

    #[test]
    fn hash_is_stable_and_content_sensitive() {
        let a = ChainConfig::default();
        let b = ChainConfig::default();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);

        let mut c = ChainConfig::default();
        c.noise.seed = 1;
        assert_ne!(a.hash(), c.hash());
        assert_ne!(a.hash(), ChainConfig::fig6().hash());
    }

    #[test]
    fn empty_json_yields_defaults() {
        let config = ChainConfig::from_json_str("{}").unwrap();
        assert_eq!(config, ChainConfig::default());
    }

    #[test]
    fn partial_json_fills_remaining_defaults() {
        let config =
            ChainConfig::from_json_str(r#"{"noise": {"seed": 7}, "matching_window_s": 0.25}"#)
                .unwrap();
        assert_eq!(config.noise.seed, 7);
        assert_eq!(config.matching_window_s, 0.25);
        assert_eq!(config.afe, AfeConfig::default());
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(ChainConfig::from_json_str(r#"{"not_a_field": 1}"#).is_err());
        assert!(ChainConfig::from_json_str(r#"{"afe": {"r9_ohm": 1}}"#).is_err());
    }

    #[test]
    fn validation_names_the_field() {
        let mut config = ChainConfig::default();
        config.afe.fc_hp_hz = 40.0;
        match config.validate() {
            Err(Error::InvalidConfig { field, .. }) => assert!(field.contains("fc_hp")),
            other => panic!("expected a field-path error, got {other:?}"),
        }
        let config = ChainConfig {
            source_rate_hz: 100.0, // below the 256 Hz acquisition rate
            ..ChainConfig::default()
        };
        assert!(config.validate().is_err());
    }

    #[test]
    fn round_trips_through_json() {
        let config = ChainConfig::fig6();
        let json = config.canonical_json();
        let back = ChainConfig::from_json_str(&json).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn preset_parses_from_str() {
        assert_eq!("fig6".parse::<Preset>().unwrap(), Preset::Fig6);
        assert!("fig7".parse::<Preset>().is_err());
    }

    #[test]
    fn preset_applies_on_top_of_custom_config() {
        let mut config = ChainConfig::default();
        config.noise.seed = 99;
        config.apply_preset(Preset::Fig6);
        assert_eq!(config.noise.seed, 99);
        assert_eq!(config.adc.input_offset_v, 0.045);
        assert_eq!(config.afe.input_attenuation, 1e-4);
    }
}
