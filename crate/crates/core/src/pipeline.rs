//! End-to-end composition: scenario -> electrode voltage -> noise -> analog
//! front end -> ADC -> serial log, and the reverse analysis path from a log
//! to events and metrics.

use serde::{Deserialize, Serialize};

use crate::adc::acquire;
use crate::afe::{amplify_chain, design_filter};
use crate::config::ChainConfig;
use crate::detect::{detect_events, DetectionEvent, Polarity};
use crate::error::{Error, Result};
use crate::metrics::{accuracy_against_truth, snr_db, MetricsReport, Provenance};
use crate::noise::{apply_all, GENERATOR_ID};
use crate::serial::SerialLog;
use crate::signal_model::{gaze_to_differential, render_gaze_trace, GazeScenario};

/// Stimulus ground truth saved beside a simulated log, for later
/// latency/accuracy analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub config_hash: String,
    pub events: Vec<TruthEvent>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthEvent {
    pub onset_s: f64,
    pub polarity: Polarity,
}

impl GroundTruth {
    pub fn from_scenario(scenario: &GazeScenario, config_hash: String) -> Self {
        GroundTruth {
            config_hash,
            events: scenario
                .stimulus_events()
                .into_iter()
                .map(|(onset_s, polarity)| TruthEvent { onset_s, polarity })
                .collect(),
        }
    }

    fn onset_pairs(&self) -> Vec<(f64, Polarity)> {
        self.events
            .iter()
            .map(|e| (e.onset_s, e.polarity))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    pub log: SerialLog,
    pub truth: GroundTruth,
    /// Samples that hit the supply rail inside the analog chain.
    pub clipped_samples: usize,
}

/// Run a scenario through the whole chain. Deterministic per config
/// (including its seed): identical inputs produce identical output bytes.
pub fn simulate(config: &ChainConfig, scenario: &GazeScenario) -> Result<SimulationOutput> {
    config.validate()?;
    scenario.validate()?;

    let trace = render_gaze_trace(scenario, config.source_rate_hz)?;
    let raw = gaze_to_differential(&trace, &config.crp)?;
    let raw = apply_all(raw, &config.noise)?;
    let coeffs = design_filter(&config.afe, config.source_rate_hz)?;
    let amplified = amplify_chain(&raw, &config.afe, &coeffs)?;
    let records = acquire(&amplified.volts, config.source_rate_hz, &config.adc)?;

    let hash = config.hash();
    let log = SerialLog {
        sample_rate_hz: config.adc.sample_rate_hz,
        v_ref: config.adc.v_ref,
        bits: config.adc.bits,
        source: Some(format!("sim:{hash}")),
        records,
    };
    Ok(SimulationOutput {
        log,
        truth: GroundTruth::from_scenario(scenario, hash),
        clipped_samples: amplified.clipped_samples,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessOutput {
    pub events: Vec<DetectionEvent>,
    pub report: MetricsReport,
}

/// Detect events in a log and compute its metrics; with ground truth the
/// report gains latency and hit/miss accounting.
pub fn process_log(
    config: &ChainConfig,
    log: &SerialLog,
    truth: Option<&GroundTruth>,
) -> Result<ProcessOutput> {
    config.validate()?;
    if log.bits != config.adc.bits {
        return Err(Error::invalid_config(
            "adc.bits",
            format!(
                "log header says {} bits but the config says {}",
                log.bits, config.adc.bits
            ),
        ));
    }
    if (log.v_ref - config.adc.v_ref).abs() > 1e-12 {
        return Err(Error::invalid_config(
            "adc.v_ref",
            format!(
                "log header says v_ref={} but the config says {}",
                log.v_ref, config.adc.v_ref
            ),
        ));
    }

    let events = detect_events(&log.records, &config.detector)?;
    let snr = snr_db(&log.volts())?;
    let accuracy = truth
        .map(|t| accuracy_against_truth(&t.onset_pairs(), &events, config.matching_window_s))
        .transpose()?;
    let report = MetricsReport::new(
        snr,
        accuracy,
        Provenance {
            config_hash: config.hash(),
            seed: config.noise.seed,
            generator: GENERATOR_ID.to_string(),
        },
    );
    Ok(ProcessOutput { events, report })
}

/// The canonical ten-saccade alternating scenario: first to +30 degrees,
/// then swinging to the opposite extreme every two seconds.
pub fn alternating_scenario(saccades: usize) -> GazeScenario {
    use crate::signal_model::Saccade;
    let saccades = (0..saccades)
        .map(|i| Saccade {
            onset_s: 1.0 + 2.0 * i as f64,
            target_angle_deg: if i % 2 == 0 { 30.0 } else { -30.0 },
            transition_duration_s: 0.05,
        })
        .collect::<Vec<_>>();
    let total = saccades.last().map(|s| s.end_s() + 2.0).unwrap_or(2.0);
    GazeScenario {
        total_duration_s: total,
        initial_angle_deg: 0.0,
        saccades,
    }
}

/// Events rendered as CSV: `onset_s,polarity,peak_v,peak_time_s`, with the
/// run's config hash in a leading comment.
pub fn events_to_csv(events: &[DetectionEvent], config_hash: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("# config_hash={config_hash}\n"));
    out.push_str("onset_s,polarity,peak_v,peak_time_s\n");
    for e in events {
        out.push_str(&format!(
            "{},{},{},{}\n",
            e.onset_s, e.polarity, e.peak_value_v, e.peak_time_s
        ));
    }
    out
}
