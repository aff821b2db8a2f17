//! Seeded interference injection: powerline coupling, baseline drift, and
//! broadband environmental noise.
//!
//! Powerline coupling rides on the common-mode path (the body-as-antenna
//! mechanism), so the driven-right-leg stage and the amplifier's CMRR can
//! attenuate it downstream; drift and white noise are differential. Every
//! operation is a pure function of `(signal, config)` — the seed lives in
//! the config, and each operation draws from its own generator stream, so
//! the operations commute and identical inputs reproduce identical bytes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal_model::RawSignal;

/// Name of the generator algorithm, recorded in report provenance.
/// Reproducibility across implementations is only promised when this matches.
pub const GENERATOR_ID: &str = "chacha8";

const STREAM_DRIFT: u64 = 1;
const STREAM_WHITE: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// Mains frequency; 50 or 60 Hz in practice, any positive value accepted.
    pub powerline_freq_hz: f64,
    /// Common-mode powerline amplitude, volts.
    pub powerline_amplitude_v: f64,
    pub powerline_phase_rad: f64,
    /// Fraction of the powerline amplitude leaking into the differential
    /// path (electrode imbalance studies); 0 keeps coupling purely common-mode.
    pub powerline_differential_fraction: f64,
    /// Per-step standard deviation of the baseline random walk, volts.
    pub drift_step_std_v: f64,
    /// Hard bound on the accumulated drift excursion, volts.
    pub drift_bound_v: f64,
    /// Broadband Gaussian noise standard deviation, volts (differential).
    pub white_noise_std_v: f64,
    /// Driven-right-leg common-mode attenuation factor, >= 1.
    pub drl_attenuation: f64,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            powerline_freq_hz: 60.0,
            powerline_amplitude_v: 10e-3,
            powerline_phase_rad: 0.0,
            powerline_differential_fraction: 0.0,
            drift_step_std_v: 0.5e-6,
            drift_bound_v: 50e-6,
            white_noise_std_v: 5e-6,
            drl_attenuation: 10.0,
            seed: 0,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("noise.powerline_amplitude_v", self.powerline_amplitude_v),
            ("noise.drift_step_std_v", self.drift_step_std_v),
            ("noise.drift_bound_v", self.drift_bound_v),
            ("noise.white_noise_std_v", self.white_noise_std_v),
        ];
        for (field, v) in nonneg {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid_config(field, "must be finite and >= 0"));
            }
        }
        if !self.powerline_freq_hz.is_finite() || self.powerline_freq_hz <= 0.0 {
            return Err(Error::invalid_config(
                "noise.powerline_freq_hz",
                "must be > 0",
            ));
        }
        if !(0.0..=1.0).contains(&self.powerline_differential_fraction) {
            return Err(Error::invalid_config(
                "noise.powerline_differential_fraction",
                "must be in [0, 1]",
            ));
        }
        if !self.drl_attenuation.is_finite() || self.drl_attenuation < 1.0 {
            return Err(Error::invalid_config(
                "noise.drl_attenuation",
                "must be >= 1",
            ));
        }
        Ok(())
    }

    /// Disable every noise source (amplitudes and stds to zero).
    pub fn silent(mut self) -> Self {
        self.powerline_amplitude_v = 0.0;
        self.drift_step_std_v = 0.0;
        self.white_noise_std_v = 0.0;
        self
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

/// Add mains interference to the common-mode channel:
/// `cm[i] += A * sin(2*pi*f*t_i + phase)`. A configured differential
/// fraction leaks the same waveform into the differential channel.
pub fn add_powerline(mut signal: RawSignal, config: &NoiseConfig) -> RawSignal {
    if config.powerline_amplitude_v == 0.0 {
        return signal;
    }
    let a = config.powerline_amplitude_v;
    let w = 2.0 * std::f64::consts::PI * config.powerline_freq_hz;
    let frac = config.powerline_differential_fraction;
    for i in 0..signal.len() {
        let t = i as f64 / signal.sample_rate_hz;
        let s = a * (w * t + config.powerline_phase_rad).sin();
        signal.common_mode_v[i] += s;
        if frac > 0.0 {
            signal.differential_v[i] += frac * s;
        }
    }
    signal
}

/// Add a seeded, bounded random walk to the differential channel.
pub fn add_drift(mut signal: RawSignal, config: &NoiseConfig) -> RawSignal {
    if config.drift_step_std_v == 0.0 {
        return signal;
    }
    let mut rng = config.rng(STREAM_DRIFT);
    let step = Normal::new(0.0, config.drift_step_std_v).expect("validated std");
    let bound = config.drift_bound_v;
    let mut walk = 0.0f64;
    for v in signal.differential_v.iter_mut() {
        walk += step.sample(&mut rng);
        walk = walk.clamp(-bound, bound);
        *v += walk;
    }
    signal
}

/// Add seeded Gaussian broadband noise to the differential channel.
pub fn add_white(mut signal: RawSignal, config: &NoiseConfig) -> RawSignal {
    if config.white_noise_std_v == 0.0 {
        return signal;
    }
    let mut rng = config.rng(STREAM_WHITE);
    let dist = Normal::new(0.0, config.white_noise_std_v).expect("validated std");
    for v in signal.differential_v.iter_mut() {
        *v += dist.sample(&mut rng);
    }
    signal
}

/// Driven-right-leg stage: divide the common-mode channel by
/// `attenuation_factor` (>= 1), leaving the differential channel untouched.
pub fn drl_attenuate(mut signal: RawSignal, attenuation_factor: f64) -> Result<RawSignal> {
    if !attenuation_factor.is_finite() || attenuation_factor < 1.0 {
        return Err(Error::invalid_config(
            "drl_attenuation",
            format!("factor {attenuation_factor} must be >= 1"),
        ));
    }
    for v in signal.common_mode_v.iter_mut() {
        *v /= attenuation_factor;
    }
    Ok(signal)
}

/// Apply every configured noise source in the canonical order:
/// powerline, drift, white, then the DRL stage.
pub fn apply_all(signal: RawSignal, config: &NoiseConfig) -> Result<RawSignal> {
    config.validate()?;
    let signal = add_powerline(signal, config);
    let signal = add_drift(signal, config);
    let signal = add_white(signal, config);
    drl_attenuate(signal, config.drl_attenuation)
}
