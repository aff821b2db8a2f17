//! Figures of merit: SNR in dB, mean detection latency, and detection
//! accuracy against scenario ground truth.
//!
//! The SNR estimator is implemented exactly as the front-end literature
//! defines it: signal power is the mean squared voltage, noise power is the
//! variance. Note that mean(v^2)/var(v) equals (variance + mean^2)/variance,
//! so any DC offset inflates the figure; it measures true SNR only when the
//! signal content sits in the mean and the noise in the variance. The
//! band-power estimator in [`band_power_snr_db`] is a clearly-marked
//! extension without that caveat.

use serde::{Deserialize, Serialize};

use crate::detect::{DetectionEvent, Polarity};
use crate::error::{Error, Result};
use crate::signal_model::GazeScenario;

/// Which variance normalization the SNR estimator uses. Population
/// (divide-by-N) matches the single-realization usage in the source
/// material; Sample (divide-by-N-1) is available as an alternative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarianceMode {
    #[default]
    Population,
    Sample,
}

/// SNR estimate with its power components. A constant input has zero
/// variance; `snr_db` is then `+inf` and `infinite` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrEstimate {
    pub snr_db: f64,
    pub signal_power: f64,
    pub noise_power: f64,
    pub infinite: bool,
}

/// `10 * log10(mean(v^2) / variance(v))` with population variance.
pub fn snr_db(samples: &[f64]) -> Result<SnrEstimate> {
    snr_db_with(samples, VarianceMode::Population)
}

pub fn snr_db_with(samples: &[f64], mode: VarianceMode) -> Result<SnrEstimate> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::invalid_config(
            "samples",
            format!("SNR needs at least 2 samples, got {n}"),
        ));
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let signal_power = samples.iter().map(|v| v * v).sum::<f64>() / nf;
    let centered: f64 = samples.iter().map(|v| (v - mean) * (v - mean)).sum();
    // a truly constant input must report the infinite sentinel even though
    // the centered sum picks up rounding dust from the mean
    let constant = samples.windows(2).all(|w| w[0] == w[1]);
    let noise_power = if constant {
        0.0
    } else {
        match mode {
            VarianceMode::Population => centered / nf,
            VarianceMode::Sample => centered / (nf - 1.0),
        }
    };
    if noise_power == 0.0 {
        return Ok(SnrEstimate {
            snr_db: f64::INFINITY,
            signal_power,
            noise_power,
            infinite: true,
        });
    }
    Ok(SnrEstimate {
        snr_db: 10.0 * (signal_power / noise_power).log10(),
        signal_power,
        noise_power,
        infinite: false,
    })
}

/// Band-power SNR (extension): signal power is the spectral power inside
/// `[f_lo, f_hi]`, noise power the remainder, both via a direct DFT of the
/// mean-removed samples.
pub fn band_power_snr_db(
    samples: &[f64],
    sample_rate_hz: f64,
    f_lo: f64,
    f_hi: f64,
) -> Result<f64> {
    let n = samples.len();
    if n < 4 {
        return Err(Error::invalid_config("samples", "need at least 4 samples"));
    }
    if sample_rate_hz.is_nan()
        || sample_rate_hz <= 0.0
        || f_lo.is_nan()
        || f_hi.is_nan()
        || f_lo < 0.0
        || f_lo >= f_hi
    {
        return Err(Error::invalid_config(
            "band",
            "need sample_rate > 0 and 0 <= f_lo < f_hi",
        ));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let mut in_band = 0.0f64;
    let mut out_band = 0.0f64;
    // one-sided bins up to Nyquist
    for k in 1..=n / 2 {
        let f = k as f64 * sample_rate_hz / n as f64;
        let w = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        let (mut re, mut im) = (0.0f64, 0.0f64);
        for (i, &v) in samples.iter().enumerate() {
            let phase = w * i as f64;
            re += (v - mean) * phase.cos();
            im -= (v - mean) * phase.sin();
        }
        let power = re * re + im * im;
        if f >= f_lo && f <= f_hi {
            in_band += power;
        } else {
            out_band += power;
        }
    }
    if out_band == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (in_band / out_band).log10())
}

/// Latency and hit/miss accounting from greedy chronological matching.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    /// Mean of (detection - stimulus) over matched pairs; absent when no
    /// pair matched.
    pub mean_latency_s: Option<f64>,
    pub n_pairs: usize,
    pub misses: usize,
    pub false_positives: usize,
}

/// Match each stimulus onset with the earliest unmatched detection inside
/// `[onset, onset + window_s]`, chronologically. Unmatched stimuli are
/// misses, unmatched detections false positives.
pub fn mean_latency(
    stimulus_onsets: &[f64],
    detection_onsets: &[f64],
    window_s: f64,
) -> Result<LatencyStats> {
    let (sum, pairs, misses, false_positives) =
        match_onsets(stimulus_onsets, detection_onsets, window_s)?;
    Ok(LatencyStats {
        mean_latency_s: (pairs > 0).then(|| sum / pairs as f64),
        n_pairs: pairs,
        misses,
        false_positives,
    })
}

fn match_onsets(
    stimuli: &[f64],
    detections: &[f64],
    window_s: f64,
) -> Result<(f64, usize, usize, usize)> {
    if !window_s.is_finite() || window_s <= 0.0 {
        return Err(Error::invalid_config(
            "matching_window_s",
            format!("window {window_s} must be > 0"),
        ));
    }
    for list in [stimuli, detections] {
        if list.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Stream(
                "onset lists must be time-ordered".to_string(),
            ));
        }
    }
    let mut sum = 0.0f64;
    let mut pairs = 0usize;
    let mut misses = 0usize;
    let mut next_det = 0usize;
    for &s in stimuli {
        // skip detections that predate this stimulus; they can never match
        // a later stimulus either, so they are false positives
        while next_det < detections.len() && detections[next_det] < s {
            next_det += 1;
        }
        if next_det < detections.len() && detections[next_det] <= s + window_s {
            sum += detections[next_det] - s;
            pairs += 1;
            next_det += 1;
        } else {
            misses += 1;
        }
    }
    let false_positives = detections.len() - pairs;
    Ok((sum, pairs, misses, false_positives))
}

/// Per-polarity accuracy against scenario ground truth: UP saccades match
/// UP detections, DOWN saccades DOWN detections, each through the same
/// greedy pairing as [`mean_latency`].
pub fn accuracy_report(
    scenario: &GazeScenario,
    events: &[DetectionEvent],
    window_s: f64,
) -> Result<LatencyStats> {
    scenario.validate()?;
    let truth = scenario.stimulus_events();
    accuracy_against_truth(&truth, events, window_s)
}

/// Same matching, but against an explicit ground-truth event list.
pub fn accuracy_against_truth(
    truth: &[(f64, Polarity)],
    events: &[DetectionEvent],
    window_s: f64,
) -> Result<LatencyStats> {
    let mut sum = 0.0f64;
    let mut pairs = 0usize;
    let mut misses = 0usize;
    let mut false_positives = 0usize;
    for polarity in [Polarity::Up, Polarity::Down] {
        let stim: Vec<f64> = truth
            .iter()
            .filter(|(_, p)| *p == polarity)
            .map(|(t, _)| *t)
            .collect();
        let det: Vec<f64> = events
            .iter()
            .filter(|e| e.polarity == polarity)
            .map(|e| e.onset_s)
            .collect();
        let (s, p, m, f) = match_onsets(&stim, &det, window_s)?;
        sum += s;
        pairs += p;
        misses += m;
        false_positives += f;
    }
    Ok(LatencyStats {
        mean_latency_s: (pairs > 0).then(|| sum / pairs as f64),
        n_pairs: pairs,
        misses,
        false_positives,
    })
}

/// Everything a run reports, plus the provenance needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// `None` exactly when `snr_infinite` (constant signal).
    pub snr_db: Option<f64>,
    pub snr_infinite: bool,
    pub signal_power_v2: f64,
    pub noise_power_v2: f64,
    pub mean_latency_s: Option<f64>,
    pub n_pairs: usize,
    pub hits: usize,
    pub misses: usize,
    pub false_positives: usize,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub generator: String,
}

impl MetricsReport {
    pub fn new(snr: SnrEstimate, accuracy: Option<LatencyStats>, provenance: Provenance) -> Self {
        let accuracy = accuracy.unwrap_or(LatencyStats {
            mean_latency_s: None,
            n_pairs: 0,
            misses: 0,
            false_positives: 0,
        });
        MetricsReport {
            snr_db: (!snr.infinite).then_some(snr.snr_db),
            snr_infinite: snr.infinite,
            signal_power_v2: snr.signal_power,
            noise_power_v2: snr.noise_power,
            mean_latency_s: accuracy.mean_latency_s,
            n_pairs: accuracy.n_pairs,
            hits: accuracy.n_pairs,
            misses: accuracy.misses,
            false_positives: accuracy.false_positives,
            provenance,
        }
    }

    /// Aligned plain-text rendering for the CLI.
    pub fn render_table(&self) -> String {
        let fmt_opt = |v: Option<f64>, inf: bool| {
            if inf {
                "+inf".to_string()
            } else {
                match v {
                    Some(x) => format!("{x:.6}"),
                    None => "-".to_string(),
                }
            }
        };
        let rows = [
            ("snr_db", fmt_opt(self.snr_db, self.snr_infinite)),
            ("signal_power_v2", format!("{:.6e}", self.signal_power_v2)),
            ("noise_power_v2", format!("{:.6e}", self.noise_power_v2)),
            ("mean_latency_s", fmt_opt(self.mean_latency_s, false)),
            ("n_pairs", self.n_pairs.to_string()),
            ("hits", self.hits.to_string()),
            ("misses", self.misses.to_string()),
            ("false_positives", self.false_positives.to_string()),
            ("config_hash", self.provenance.config_hash.clone()),
            ("seed", self.provenance.seed.to_string()),
            ("generator", self.provenance.generator.clone()),
        ];
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        rows.iter()
            .map(|(k, v)| format!("{k:<width$}  {v}\n"))
            .collect()
    }
}
