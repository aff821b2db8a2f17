//! Arduino-style acquisition model: nearest-sample decimation to the
//! acquisition rate, mid-tread quantization against the reference voltage,
//! and code-to-volts reconstruction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quantizer rounding convention. `Floor` (truncation) matches ADC hardware;
/// `Nearest` is available for sensitivity studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundingMode {
    #[default]
    Floor,
    Nearest,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdcConfig {
    pub v_ref: f64,
    pub bits: u8,
    pub sample_rate_hz: f64,
    /// Offset added to the input before quantization; maps a bipolar signal
    /// onto the single-supply 0..v_ref range.
    pub input_offset_v: f64,
    pub rounding: RoundingMode,
}

impl Default for AdcConfig {
    fn default() -> Self {
        AdcConfig {
            v_ref: 5.0,
            bits: 10,
            sample_rate_hz: 256.0,
            input_offset_v: 0.0,
            rounding: RoundingMode::Floor,
        }
    }
}

impl AdcConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.v_ref.is_finite() || self.v_ref <= 0.0 {
            return Err(Error::invalid_config("adc.v_ref", "must be > 0"));
        }
        if !(1..=16).contains(&self.bits) {
            return Err(Error::invalid_config("adc.bits", "must be in 1..=16"));
        }
        if !self.sample_rate_hz.is_finite() || self.sample_rate_hz <= 0.0 {
            return Err(Error::invalid_config("adc.sample_rate_hz", "must be > 0"));
        }
        if !self.input_offset_v.is_finite() {
            return Err(Error::invalid_config(
                "adc.input_offset_v",
                "must be finite",
            ));
        }
        Ok(())
    }

    /// Highest representable code, `2^bits - 1`.
    pub fn max_code(&self) -> u16 {
        ((1u32 << self.bits) - 1) as u16
    }
}

/// Voltage step of one code: `v_ref / 2^bits`.
pub fn lsb(config: &AdcConfig) -> f64 {
    config.v_ref / (1u32 << config.bits) as f64
}

/// Quantize a voltage to a code, clamping to the representable range.
pub fn quantize(v: f64, config: &AdcConfig) -> u16 {
    quantize_flagged(v, config).0
}

/// Quantize, also reporting whether the input fell outside the converter's
/// range and was clamped.
pub fn quantize_flagged(v: f64, config: &AdcConfig) -> (u16, bool) {
    let steps = (v + config.input_offset_v) / lsb(config);
    let raw = match config.rounding {
        RoundingMode::Floor => steps.floor(),
        RoundingMode::Nearest => steps.round(),
    };
    let max = config.max_code() as f64;
    if raw < 0.0 {
        (0, true)
    } else if raw > max {
        (config.max_code(), true)
    } else {
        (raw as u16, false)
    }
}

/// Reconstruct the voltage a code represents: `code * lsb`.
pub fn code_to_volts(code: u16, config: &AdcConfig) -> f64 {
    code as f64 * lsb(config)
}

/// One acquired sample: exact acquisition-clock timestamp, the raw code,
/// and the reconstructed voltage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub timestamp_s: f64,
    pub code: u16,
    pub volts: f64,
}

/// Sample a source-rate voltage sequence at the acquisition rate.
///
/// Decimation picks the nearest source sample (the analog low-pass already
/// bounds content far below Nyquist); timestamps are exactly
/// `k / sample_rate_hz`.
pub fn acquire(
    samples: &[f64],
    source_rate_hz: f64,
    config: &AdcConfig,
) -> Result<Vec<SampleRecord>> {
    let mut acquirer = Acquirer::new(source_rate_hz, *config)?;
    Ok(acquirer.push(samples))
}

/// Streaming acquisition: feed source-rate chunks of any size; chunk
/// boundaries never change the output.
#[derive(Debug, Clone)]
pub struct Acquirer {
    config: AdcConfig,
    ratio: f64,
    /// Source samples consumed so far.
    consumed: u64,
    /// Next output sample index (k in t = k / fs).
    next_out: u64,
}

impl Acquirer {
    pub fn new(source_rate_hz: f64, config: AdcConfig) -> Result<Self> {
        config.validate()?;
        if !source_rate_hz.is_finite() || source_rate_hz <= 0.0 {
            return Err(Error::invalid_config("source_rate_hz", "must be > 0"));
        }
        if source_rate_hz < config.sample_rate_hz {
            return Err(Error::Resample {
                source_hz: source_rate_hz,
                acquisition_hz: config.sample_rate_hz,
            });
        }
        Ok(Acquirer {
            ratio: source_rate_hz / config.sample_rate_hz,
            config,
            consumed: 0,
            next_out: 0,
        })
    }

    /// Source index feeding output sample `k`.
    fn source_index(&self, k: u64) -> u64 {
        (k as f64 * self.ratio).round() as u64
    }

    pub fn push(&mut self, chunk: &[f64]) -> Vec<SampleRecord> {
        let end = self.consumed + chunk.len() as u64;
        let mut out = Vec::new();
        loop {
            let j = self.source_index(self.next_out);
            if j >= end {
                break;
            }
            // j >= consumed holds because source indices are nondecreasing
            // in k and every earlier k was emitted before consuming past it.
            let v = chunk[(j - self.consumed) as usize];
            let code = quantize(v, &self.config);
            out.push(SampleRecord {
                timestamp_s: self.next_out as f64 / self.config.sample_rate_hz,
                code,
                volts: code_to_volts(code, &self.config),
            });
            self.next_out += 1;
        }
        self.consumed = end;
        out
    }
}
