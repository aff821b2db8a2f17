//! Analog front-end model: instrumentation-amplifier gain, first-order
//! band-pass filtering, second-stage gain, CMRR leakage, and rail clipping.
//!
//! The discrete filter sections come from the bilinear transform with
//! frequency prewarping at each cutoff, so the -3 dB points land exactly on
//! the configured corner frequencies at the design sample rate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal_model::RawSignal;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AfeConfig {
    /// Instrumentation-amplifier network, ohms: Av = (1 + 2*R2/Rgain) * R4/R3.
    pub r2_ohm: f64,
    pub r_gain_ohm: f64,
    pub r4_ohm: f64,
    pub r3_ohm: f64,
    /// Second non-inverting stage, ohms: Av = 1 + R2/R1.
    pub stage2_r2_ohm: f64,
    pub stage2_r1_ohm: f64,
    /// Band-pass corner frequencies, Hz.
    pub fc_hp_hz: f64,
    pub fc_lp_hz: f64,
    /// Symmetric supply rail; the output hard-clips at +/- this voltage.
    pub supply_rail_v: f64,
    /// Common-mode rejection ratio of the first stage, dB.
    pub cmrr_db: f64,
    /// Input-channel attenuation pad ahead of the first stage
    /// (dimensionless, <= 1; 1 means no pad fitted).
    pub input_attenuation: f64,
    /// Run the filter over a reversed prefix of the input first to suppress
    /// the startup transient. Off by default; the choice is part of the
    /// config and therefore of the run's provenance hash.
    pub prime_filter: bool,
}

impl Default for AfeConfig {
    fn default() -> Self {
        AfeConfig {
            r2_ohm: 330.0,
            r_gain_ohm: 220.0,
            r4_ohm: 100_000.0,
            r3_ohm: 10.0,
            stage2_r2_ohm: 2_500.0,
            stage2_r1_ohm: 10_000.0,
            fc_hp_hz: 0.5,
            fc_lp_hz: 30.0,
            supply_rail_v: 5.0,
            cmrr_db: 80.0,
            input_attenuation: 1.0,
            prime_filter: false,
        }
    }
}

impl AfeConfig {
    pub fn validate(&self) -> Result<()> {
        // R2 legs may be shorted (gain collapses gracefully); divider and
        // feedback legs must be positive.
        for (field, v) in [
            ("afe.r2_ohm", self.r2_ohm),
            ("afe.stage2_r2_ohm", self.stage2_r2_ohm),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid_config(field, "must be finite and >= 0"));
            }
        }
        for (field, v) in [
            ("afe.r_gain_ohm", self.r_gain_ohm),
            ("afe.r4_ohm", self.r4_ohm),
            ("afe.r3_ohm", self.r3_ohm),
            ("afe.stage2_r1_ohm", self.stage2_r1_ohm),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::invalid_config(field, "must be > 0"));
            }
        }
        if !self.fc_hp_hz.is_finite()
            || !self.fc_lp_hz.is_finite()
            || self.fc_hp_hz <= 0.0
            || self.fc_lp_hz <= 0.0
        {
            return Err(Error::invalid_config(
                "afe.fc_hp_hz/fc_lp_hz",
                "cutoffs must be > 0",
            ));
        }
        if self.fc_hp_hz >= self.fc_lp_hz {
            return Err(Error::invalid_config(
                "afe.fc_hp_hz",
                format!(
                    "high-pass cutoff {} Hz must lie below the low-pass cutoff {} Hz",
                    self.fc_hp_hz, self.fc_lp_hz
                ),
            ));
        }
        if !self.supply_rail_v.is_finite() || self.supply_rail_v <= 0.0 {
            return Err(Error::invalid_config("afe.supply_rail_v", "must be > 0"));
        }
        if !self.cmrr_db.is_finite() {
            return Err(Error::invalid_config("afe.cmrr_db", "must be finite"));
        }
        if !self.input_attenuation.is_finite()
            || self.input_attenuation <= 0.0
            || self.input_attenuation > 1.0
        {
            return Err(Error::invalid_config(
                "afe.input_attenuation",
                "must be in (0, 1]",
            ));
        }
        Ok(())
    }
}

/// First-stage (instrumentation amplifier) differential gain:
/// `(1 + 2*R2/Rgain) * (R4/R3)`.
pub fn ina_gain(config: &AfeConfig) -> Result<f64> {
    config.validate()?;
    Ok((1.0 + 2.0 * config.r2_ohm / config.r_gain_ohm) * (config.r4_ohm / config.r3_ohm))
}

/// Second-stage (non-inverting) gain: `1 + R2/R1`.
pub fn stage2_gain(config: &AfeConfig) -> Result<f64> {
    config.validate()?;
    Ok(1.0 + config.stage2_r2_ohm / config.stage2_r1_ohm)
}

/// Product of the two gain stages.
pub fn total_gain(config: &AfeConfig) -> Result<f64> {
    Ok(ina_gain(config)? * stage2_gain(config)?)
}

/// One discrete first-order section: `y[n] = b0*x[n] + b1*x[n-1] - a1*y[n-1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstOrderSection {
    pub b0: f64,
    pub b1: f64,
    pub a1: f64,
}

impl FirstOrderSection {
    pub fn identity() -> Self {
        FirstOrderSection {
            b0: 1.0,
            b1: 0.0,
            a1: 0.0,
        }
    }

    pub fn is_stable(&self) -> bool {
        self.a1.abs() < 1.0
    }

    #[inline]
    fn step(&self, state: &mut SectionState, x: f64) -> f64 {
        let y = self.b0 * x + self.b1 * state.x1 - self.a1 * state.y1;
        state.x1 = x;
        state.y1 = y;
        y
    }

    /// Magnitude of the section's frequency response at `f` Hz for a design
    /// rate of `fs` Hz.
    pub fn magnitude_at(&self, f: f64, fs: f64) -> f64 {
        let w = 2.0 * std::f64::consts::PI * f / fs;
        let (cos, sin) = (w.cos(), w.sin());
        let num_re = self.b0 + self.b1 * cos;
        let num_im = -self.b1 * sin;
        let den_re = 1.0 + self.a1 * cos;
        let den_im = -self.a1 * sin;
        (num_re * num_re + num_im * num_im).sqrt() / (den_re * den_re + den_im * den_im).sqrt()
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct SectionState {
    x1: f64,
    y1: f64,
}

/// Discrete band-pass realization: one first-order high-pass section and one
/// first-order low-pass section, designed for `sample_rate_hz`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterCoefficients {
    pub sample_rate_hz: f64,
    pub high_pass: FirstOrderSection,
    pub low_pass: FirstOrderSection,
}

impl FilterCoefficients {
    /// Unity pass-through (both sections disabled); used to study the gain
    /// chain in isolation.
    pub fn identity(sample_rate_hz: f64) -> Self {
        FilterCoefficients {
            sample_rate_hz,
            high_pass: FirstOrderSection::identity(),
            low_pass: FirstOrderSection::identity(),
        }
    }

    pub fn is_stable(&self) -> bool {
        self.high_pass.is_stable() && self.low_pass.is_stable()
    }

    /// Cascade magnitude response at `f` Hz.
    pub fn magnitude_at(&self, f: f64) -> f64 {
        self.high_pass.magnitude_at(f, self.sample_rate_hz)
            * self.low_pass.magnitude_at(f, self.sample_rate_hz)
    }
}

/// Design the discrete band-pass sections via the bilinear transform with
/// frequency prewarping at each cutoff.
pub fn design_filter(config: &AfeConfig, sample_rate_hz: f64) -> Result<FilterCoefficients> {
    config.validate()?;
    if sample_rate_hz.is_nan() || sample_rate_hz <= 2.0 * config.fc_lp_hz {
        return Err(Error::Aliasing {
            sample_rate_hz,
            fc_lp_hz: config.fc_lp_hz,
        });
    }
    let fs2 = 2.0 * sample_rate_hz;
    let prewarp = |fc: f64| fs2 * (std::f64::consts::PI * fc / sample_rate_hz).tan();

    let wa_hp = prewarp(config.fc_hp_hz);
    let wa_lp = prewarp(config.fc_lp_hz);

    // H_hp(s) = s / (s + wa); H_lp(s) = wa / (s + wa); s = fs2 (1-z^-1)/(1+z^-1)
    let high_pass = FirstOrderSection {
        b0: fs2 / (fs2 + wa_hp),
        b1: -fs2 / (fs2 + wa_hp),
        a1: (wa_hp - fs2) / (fs2 + wa_hp),
    };
    let low_pass = FirstOrderSection {
        b0: wa_lp / (fs2 + wa_lp),
        b1: wa_lp / (fs2 + wa_lp),
        a1: (wa_lp - fs2) / (fs2 + wa_lp),
    };
    let coeffs = FilterCoefficients {
        sample_rate_hz,
        high_pass,
        low_pass,
    };
    if !coeffs.is_stable() {
        return Err(Error::Internal(format!(
            "filter design produced an unstable section: {coeffs:?}"
        )));
    }
    Ok(coeffs)
}

/// Analytic continuous-time band-pass magnitude at `f` Hz:
/// `(f/fc_hp)/sqrt(1+(f/fc_hp)^2) * 1/sqrt(1+(f/fc_lp)^2)`.
pub fn magnitude_response(config: &AfeConfig, f: f64) -> Result<f64> {
    config.validate()?;
    if !f.is_finite() || f < 0.0 {
        return Err(Error::invalid_config(
            "frequency",
            format!("{f} Hz must be finite and >= 0"),
        ));
    }
    if f == 0.0 {
        return Ok(0.0);
    }
    let rh = f / config.fc_hp_hz;
    let rl = f / config.fc_lp_hz;
    Ok(rh / (1.0 + rh * rh).sqrt() / (1.0 + rl * rl).sqrt())
}

/// Output of [`amplify_chain`]: the amplified voltage sequence plus how many
/// samples hit the supply rail. Clipping destroys the angle-voltage
/// linearity, so the count is part of the result, not a silent side effect.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplifiedSignal {
    pub sample_rate_hz: f64,
    pub volts: Vec<f64>,
    pub clipped_samples: usize,
}

/// Run the full analog chain over an electrode-level signal:
/// input pad -> INA (differential gain + common-mode leakage per CMRR) ->
/// band-pass -> stage-2 gain -> rail clip.
pub fn amplify_chain(
    signal: &RawSignal,
    config: &AfeConfig,
    coeffs: &FilterCoefficients,
) -> Result<AmplifiedSignal> {
    signal.validate()?;
    let g1 = ina_gain(config)?;
    let g2 = stage2_gain(config)?;
    if (signal.sample_rate_hz - coeffs.sample_rate_hz).abs() > 1e-9 {
        return Err(Error::invalid_config(
            "filter.sample_rate_hz",
            format!(
                "filter designed for {} Hz cannot run on a {} Hz signal",
                coeffs.sample_rate_hz, signal.sample_rate_hz
            ),
        ));
    }
    let cm_gain = g1 / 10f64.powf(config.cmrr_db / 20.0);
    let att = config.input_attenuation;
    let rail = config.supply_rail_v;

    let pre = |i: usize| -> f64 {
        g1 * att * signal.differential_v[i] + cm_gain * att * signal.common_mode_v[i]
    };

    let mut hp_state = SectionState::default();
    let mut lp_state = SectionState::default();

    if config.prime_filter && !signal.is_empty() {
        // Warm the section states on a time-reversed prefix spanning a few
        // high-pass time constants; outputs are discarded.
        let prefix =
            ((2.0 * signal.sample_rate_hz / config.fc_hp_hz).round() as usize).min(signal.len());
        for i in (0..prefix).rev() {
            let x = pre(i);
            let y = coeffs.high_pass.step(&mut hp_state, x);
            coeffs.low_pass.step(&mut lp_state, y);
        }
    }

    let mut volts = Vec::with_capacity(signal.len());
    let mut clipped_samples = 0usize;
    for i in 0..signal.len() {
        let x = pre(i);
        let y = coeffs.high_pass.step(&mut hp_state, x);
        let y = coeffs.low_pass.step(&mut lp_state, y);
        let y = g2 * y;
        if y.abs() > rail {
            clipped_samples += 1;
            volts.push(rail.copysign(y));
        } else {
            volts.push(y);
        }
    }
    Ok(AmplifiedSignal {
        sample_rate_hz: signal.sample_rate_hz,
        volts,
        clipped_samples,
    })
}

/// Zero-state run of the band-pass cascade over a plain sample buffer.
/// No gain, no clipping; the response oracle for tests and tooling.
pub fn filter_samples(coeffs: &FilterCoefficients, input: &[f64]) -> Vec<f64> {
    let mut hp_state = SectionState::default();
    let mut lp_state = SectionState::default();
    input
        .iter()
        .map(|&x| {
            let y = coeffs.high_pass.step(&mut hp_state, x);
            coeffs.low_pass.step(&mut lp_state, y)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const DB3: f64 = -3.010299956639812; // 20*log10(1/sqrt(2))

    fn db(x: f64) -> f64 {
        20.0 * x.log10()
    }

    /// Single-frequency DFT magnitude of an impulse response; the
    /// implementation-independent oracle for filter gain.
    fn dft_magnitude(h: &[f64], f: f64, fs: f64) -> f64 {
        let w = 2.0 * std::f64::consts::PI * f / fs;
        let (mut re, mut im) = (0.0f64, 0.0f64);
        for (n, &x) in h.iter().enumerate() {
            re += x * (w * n as f64).cos();
            im -= x * (w * n as f64).sin();
        }
        (re * re + im * im).sqrt()
    }

    fn impulse_response(coeffs: &FilterCoefficients, len: usize) -> Vec<f64> {
        let mut input = vec![0.0; len];
        input[0] = 1.0;
        filter_samples(coeffs, &input)
    }

    #[test]
    fn ina_gain_default_is_40000() {
        assert_eq!(ina_gain(&AfeConfig::default()).unwrap(), 40_000.0);
    }

    #[test]
    fn ina_gain_collapses_with_shorted_r2() {
        let cfg = AfeConfig {
            r2_ohm: 0.0,
            ..AfeConfig::default()
        };
        assert_eq!(ina_gain(&cfg).unwrap(), 10_000.0); // r4/r3
    }

    #[test]
    fn ina_gain_small_network() {
        let cfg = AfeConfig {
            r2_ohm: 100.0,
            r_gain_ohm: 200.0,
            r4_ohm: 10.0,
            r3_ohm: 10.0,
            ..AfeConfig::default()
        };
        assert_eq!(ina_gain(&cfg).unwrap(), 2.0);
    }

    #[test]
    fn ina_gain_rejects_nonpositive_divider() {
        let cfg = AfeConfig {
            r_gain_ohm: 0.0,
            ..AfeConfig::default()
        };
        assert!(ina_gain(&cfg).is_err());
        let cfg = AfeConfig {
            r3_ohm: -1.0,
            ..AfeConfig::default()
        };
        assert!(ina_gain(&cfg).is_err());
    }

    #[test]
    fn stage2_gain_cases() {
        let unity = AfeConfig {
            stage2_r2_ohm: 0.0,
            ..AfeConfig::default()
        };
        assert_eq!(stage2_gain(&unity).unwrap(), 1.0);
        assert_eq!(stage2_gain(&AfeConfig::default()).unwrap(), 1.25);
        let double = AfeConfig {
            stage2_r2_ohm: 10_000.0,
            stage2_r1_ohm: 10_000.0,
            ..AfeConfig::default()
        };
        assert_eq!(stage2_gain(&double).unwrap(), 2.0);
    }

    #[test]
    fn total_gain_default_is_50000() {
        assert_eq!(total_gain(&AfeConfig::default()).unwrap(), 50_000.0);
    }

    #[test]
    fn total_gain_unity_stages() {
        let cfg = AfeConfig {
            r2_ohm: 0.0,
            r4_ohm: 10.0,
            r3_ohm: 10.0,
            stage2_r2_ohm: 0.0,
            ..AfeConfig::default()
        };
        assert_eq!(total_gain(&cfg).unwrap(), 1.0);
    }

    #[test]
    fn total_gain_is_the_product() {
        let cfg = AfeConfig {
            stage2_r2_ohm: 10_000.0,
            stage2_r1_ohm: 10_000.0,
            ..AfeConfig::default()
        };
        assert_eq!(total_gain(&cfg).unwrap(), 80_000.0);
    }

    #[test]
    fn design_rejects_aliasing_rate() {
        let err = design_filter(&AfeConfig::default(), 40.0);
        assert!(matches!(err, Err(Error::Aliasing { .. })));
    }

    #[test]
    fn design_rejects_inverted_cutoffs() {
        let cfg = AfeConfig {
            fc_hp_hz: 40.0,
            ..AfeConfig::default()
        };
        assert!(design_filter(&cfg, 256.0).is_err());
    }

    #[test]
    fn sections_hit_their_cutoffs_exactly() {
        let coeffs = design_filter(&AfeConfig::default(), 256.0).unwrap();
        // prewarping pins each section's -3 dB point on its own cutoff
        let hp_db = db(coeffs.high_pass.magnitude_at(0.5, 256.0));
        let lp_db = db(coeffs.low_pass.magnitude_at(30.0, 256.0));
        assert!((hp_db - DB3).abs() < 0.1, "hp at cutoff: {hp_db} dB");
        assert!((lp_db - DB3).abs() < 0.1, "lp at cutoff: {lp_db} dB");
    }

    #[test]
    fn cutoffs_verified_by_impulse_dft_oracle() {
        // DFT each section's own impulse response: the -3 dB point must sit
        // on the configured cutoff. 120 s covers the slow high-pass pole.
        let designed = design_filter(&AfeConfig::default(), 256.0).unwrap();
        let hp_only = FilterCoefficients {
            low_pass: FirstOrderSection::identity(),
            ..designed
        };
        let lp_only = FilterCoefficients {
            high_pass: FirstOrderSection::identity(),
            ..designed
        };
        let hp_db = db(dft_magnitude(
            &impulse_response(&hp_only, 256 * 120),
            0.5,
            256.0,
        ));
        let lp_db = db(dft_magnitude(
            &impulse_response(&lp_only, 256 * 120),
            30.0,
            256.0,
        ));
        assert!((hp_db - DB3).abs() < 0.1, "hp cutoff via dft: {hp_db}");
        assert!((lp_db - DB3).abs() < 0.1, "lp cutoff via dft: {lp_db}");
    }

    #[test]
    fn midband_matches_analytic_within_half_db() {
        let coeffs = design_filter(&AfeConfig::default(), 256.0).unwrap();
        let h = impulse_response(&coeffs, 256 * 120);
        let got = db(dft_magnitude(&h, 5.0, 256.0));
        assert!((got - (-0.162)).abs() < 0.5, "midband gain {got} dB");
    }

    #[test]
    fn discrete_tracks_analytic_over_the_passband() {
        let cfg = AfeConfig::default();
        let coeffs = design_filter(&cfg, 256.0).unwrap();
        let h = impulse_response(&coeffs, 256 * 120);
        for &f in &[1.0, 2.0, 5.0, 10.0, 20.0] {
            let discrete = dft_magnitude(&h, f, 256.0);
            let analytic = magnitude_response(&cfg, f).unwrap();
            let rel = (discrete - analytic).abs() / analytic;
            assert!(
                rel < 0.05,
                "{f} Hz: discrete {discrete} vs analytic {analytic}"
            );
        }
    }

    #[test]
    fn steady_state_sine_gain_matches_analytic() {
        let cfg = AfeConfig::default();
        let coeffs = design_filter(&cfg, 256.0).unwrap();
        let fs = 256.0;
        let f = 5.0;
        let n = (20.0 * fs) as usize;
        let input: Vec<f64> = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * f * i as f64 / fs).sin())
            .collect();
        let out = filter_samples(&coeffs, &input);
        // amplitude over the last 2 seconds, well past the HP transient
        let tail = &out[n - 512..];
        let amp = tail.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let analytic = magnitude_response(&cfg, f).unwrap();
        assert!(
            (amp - analytic).abs() / analytic < 0.05,
            "steady-state gain {amp} vs analytic {analytic}"
        );
    }

    #[test]
    fn dc_input_decays_to_nothing() {
        let coeffs = design_filter(&AfeConfig::default(), 256.0).unwrap();
        let out = filter_samples(&coeffs, &vec![1.0; 256 * 20]);
        let last = out.last().unwrap().abs();
        assert!(last < 1e-3, "dc residue after 20 s: {last}");
    }

    #[test]
    fn impulse_response_decays_to_noise_floor() {
        let coeffs = design_filter(&AfeConfig::default(), 256.0).unwrap();
        assert!(coeffs.is_stable());
        let h = impulse_response(&coeffs, 256 * 60);
        let peak = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tail = h.last().unwrap().abs();
        assert!(
            tail < 1e-9 * peak,
            "impulse response tail {tail} vs peak {peak}"
        );
    }

    #[test]
    fn analytic_magnitude_known_points() {
        let cfg = AfeConfig::default();
        assert_eq!(magnitude_response(&cfg, 0.0).unwrap(), 0.0);
        let mid = magnitude_response(&cfg, 5.0).unwrap();
        assert!((mid - 0.9814986384101425).abs() < 1e-12);
        assert!(magnitude_response(&cfg, -1.0).is_err());
        // with the high-pass corner pushed to DC, the cutoff sits at 1/sqrt(2)
        let lp_only = AfeConfig {
            fc_hp_hz: 1e-9,
            ..cfg
        };
        let at_cut = magnitude_response(&lp_only, 30.0).unwrap();
        assert!((at_cut - 1.0 / 2f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn amplify_chain_dc_gain_without_filter() {
        // 50 uV constant differential through the 50000 V/V chain: 2.5 V.
        let n = 16;
        let sig = RawSignal {
            sample_rate_hz: 256.0,
            differential_v: vec![50e-6; n],
            common_mode_v: vec![0.0; n],
        };
        let out = amplify_chain(
            &sig,
            &AfeConfig::default(),
            &FilterCoefficients::identity(256.0),
        )
        .unwrap();
        assert_eq!(out.clipped_samples, 0);
        for &v in &out.volts {
            assert!((v - 2.5).abs() < 1e-9, "expected 2.5 V, got {v}");
        }
    }

    #[test]
    fn amplify_chain_clips_at_the_rail() {
        // 3500 uV * 50000 = 175 V, far beyond the 5 V rail.
        let sig = RawSignal {
            sample_rate_hz: 256.0,
            differential_v: vec![3.5e-3; 8],
            common_mode_v: vec![0.0; 8],
        };
        let out = amplify_chain(
            &sig,
            &AfeConfig::default(),
            &FilterCoefficients::identity(256.0),
        )
        .unwrap();
        assert_eq!(out.clipped_samples, 8);
        assert!(out.volts.iter().all(|&v| v == 5.0));
    }

    #[test]
    fn amplify_chain_zero_in_zero_out() {
        let sig = RawSignal {
            sample_rate_hz: 256.0,
            differential_v: vec![0.0; 8],
            common_mode_v: vec![0.0; 8],
        };
        let coeffs = design_filter(&AfeConfig::default(), 256.0).unwrap();
        let out = amplify_chain(&sig, &AfeConfig::default(), &coeffs).unwrap();
        assert_eq!(out.clipped_samples, 0);
        assert!(out.volts.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn amplify_chain_is_linear_below_clip() {
        let cfg = AfeConfig::default();
        let coeffs = design_filter(&cfg, 256.0).unwrap();
        let n = 512;
        let base: Vec<f64> = (0..n)
            .map(|i| 1e-6 * (2.0 * std::f64::consts::PI * 7.0 * i as f64 / 256.0).sin())
            .collect();
        let sig = RawSignal {
            sample_rate_hz: 256.0,
            differential_v: base.clone(),
            common_mode_v: vec![0.0; n],
        };
        let scaled = RawSignal {
            sample_rate_hz: 256.0,
            differential_v: base.iter().map(|v| v * 3.0).collect(),
            common_mode_v: vec![0.0; n],
        };
        let a = amplify_chain(&sig, &cfg, &coeffs).unwrap();
        let b = amplify_chain(&scaled, &cfg, &coeffs).unwrap();
        assert_eq!(a.clipped_samples, 0);
        assert_eq!(b.clipped_samples, 0);
        for i in 0..n {
            let expect = 3.0 * a.volts[i];
            assert!(
                (b.volts[i] - expect).abs() <= 1e-9 * expect.abs().max(1e-12),
                "linearity violated at sample {i}"
            );
        }
    }

    #[test]
    fn cmrr_suppresses_common_mode_by_its_ratio() {
        let cfg = AfeConfig {
            supply_rail_v: 1e9, // keep everything out of the rails
            ..AfeConfig::default()
        };
        let coeffs = design_filter(&cfg, 256.0).unwrap();
        let n = 256 * 20;
        let tone: Vec<f64> = (0..n)
            .map(|i| 1e-3 * (2.0 * std::f64::consts::PI * 5.0 * i as f64 / 256.0).sin())
            .collect();
        let diff_in = RawSignal {
            sample_rate_hz: 256.0,
            differential_v: tone.clone(),
            common_mode_v: vec![0.0; n],
        };
        let cm_in = RawSignal {
            sample_rate_hz: 256.0,
            differential_v: vec![0.0; n],
            common_mode_v: tone,
        };
        let amp_of = |sig: &RawSignal| {
            let out = amplify_chain(sig, &cfg, &coeffs).unwrap();
            out.volts[n - 512..]
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()))
        };
        let ratio = amp_of(&diff_in) / amp_of(&cm_in);
        let expect = 10f64.powf(cfg.cmrr_db / 20.0);
        assert!(
            (ratio - expect).abs() / expect < 0.01,
            "cmrr ratio {ratio} vs {expect}"
        );
    }

    #[test]
    fn mismatched_sample_rates_rejected() {
        let sig = RawSignal {
            sample_rate_hz: 512.0,
            differential_v: vec![0.0; 4],
            common_mode_v: vec![0.0; 4],
        };
        let coeffs = design_filter(&AfeConfig::default(), 256.0).unwrap();
        assert!(amplify_chain(&sig, &AfeConfig::default(), &coeffs).is_err());
    }

    #[test]
    fn priming_suppresses_startup_transient() {
        // A constant input kicks the cold high-pass with a decaying step;
        // priming on the reversed prefix settles the state first, so the
        // primed output starts near the true (zero) steady state.
        let n = 256 * 8;
        let sig = RawSignal {
            sample_rate_hz: 256.0,
            differential_v: vec![50e-6; n],
            common_mode_v: vec![0.0; n],
        };
        let cfg = AfeConfig {
            supply_rail_v: 1e9,
            ..AfeConfig::default()
        };
        let primed_cfg = AfeConfig {
            prime_filter: true,
            ..cfg
        };
        let coeffs = design_filter(&cfg, 256.0).unwrap();
        let cold = amplify_chain(&sig, &cfg, &coeffs).unwrap();
        let primed = amplify_chain(&sig, &primed_cfg, &coeffs).unwrap();
        let early_peak = |v: &[f64]| v[..256].iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let (cold_peak, primed_peak) = (early_peak(&cold.volts), early_peak(&primed.volts));
        assert!(
            primed_peak < cold_peak / 100.0,
            "priming left a transient: cold {cold_peak} V, primed {primed_peak} V"
        );
    }
}
