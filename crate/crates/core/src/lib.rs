//! EOG digital front-end simulator and signal-processing toolkit.
//!
//! Reproduces an electrooculography acquisition chain end to end — gaze
//! stimulus, electrode voltage, amplification and band-pass filtering, ADC
//! quantization, threshold event detection, and SNR/latency/accuracy
//! metrics — and runs recorded serial logs through the identical detector
//! and metrics path.

pub mod adc;
pub mod afe;
pub mod cli;
pub mod config;
pub mod detect;
pub mod error;
pub mod metrics;
pub mod noise;
pub mod pipeline;
pub mod serial;
pub mod signal_model;

pub use adc::{acquire, code_to_volts, lsb, quantize, AdcConfig, SampleRecord};
pub use afe::{
    amplify_chain, design_filter, ina_gain, magnitude_response, stage2_gain, total_gain, AfeConfig,
    FilterCoefficients,
};
pub use config::{ChainConfig, Preset};
pub use detect::{
    detect_events, digital_output, find_peaks, DetectionEvent, DetectorConfig, Polarity,
};
pub use error::{Error, Result};
pub use metrics::{accuracy_report, mean_latency, snr_db, MetricsReport};
pub use noise::{add_drift, add_powerline, add_white, drl_attenuate, NoiseConfig};
pub use pipeline::{process_log, simulate, GroundTruth, SimulationOutput};
pub use serial::{parse_serial_csv, write_serial_csv, SerialLog};
pub use signal_model::{
    gaze_to_differential, render_gaze_trace, CrpModel, GazeScenario, GazeTrace, RawSignal, Saccade,
};
