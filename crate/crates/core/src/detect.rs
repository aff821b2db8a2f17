//! Threshold-based gaze event detection over the reconstructed voltage
//! stream: bipolar thresholds with debounce, hysteresis, a refractory
//! period, and peak identification.
//!
//! The detector is a deterministic finite-state machine fed one sample at a
//! time, so chunked streaming and whole-stream processing are identical by
//! construction. Zeroing `debounce_samples` to 1 and the hysteresis and
//! refractory fields recovers a bare comparator.

use serde::{Deserialize, Serialize};

use crate::adc::SampleRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Polarity {
    Up,
    Down,
}

impl std::fmt::Display for Polarity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Polarity::Up => f.write_str("UP"),
            Polarity::Down => f.write_str("DOWN"),
        }
    }
}

/// Detector thresholds and robustness knobs. The defaults are the fig6
/// preset: an upper threshold just below the 0.0550 V maximum bench reading
/// and the 0.0400 V lower threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    pub up_threshold_v: f64,
    pub down_threshold_v: f64,
    /// Release margin: an UP event closes below `up_threshold_v - hysteresis_v`,
    /// a DOWN event above `down_threshold_v + hysteresis_v`.
    pub hysteresis_v: f64,
    /// Consecutive qualifying samples required before an event opens.
    pub debounce_samples: u32,
    /// Dead time after an event closes during which no event may open.
    pub refractory_s: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            up_threshold_v: 0.0500,
            down_threshold_v: 0.0400,
            // 10% of the threshold gap
            hysteresis_v: 0.0010,
            debounce_samples: 3,
            refractory_s: 0.2,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.up_threshold_v.is_finite() || !self.down_threshold_v.is_finite() {
            return Err(Error::invalid_config(
                "detector.thresholds",
                "must be finite",
            ));
        }
        if self.down_threshold_v >= self.up_threshold_v {
            return Err(Error::invalid_config(
                "detector.down_threshold_v",
                format!(
                    "down threshold {} must lie below the up threshold {}",
                    self.down_threshold_v, self.up_threshold_v
                ),
            ));
        }
        if !self.hysteresis_v.is_finite() || self.hysteresis_v < 0.0 {
            return Err(Error::invalid_config(
                "detector.hysteresis_v",
                "must be >= 0",
            ));
        }
        if self.debounce_samples < 1 {
            return Err(Error::invalid_config(
                "detector.debounce_samples",
                "must be >= 1",
            ));
        }
        if !self.refractory_s.is_finite() || self.refractory_s < 0.0 {
            return Err(Error::invalid_config(
                "detector.refractory_s",
                "must be >= 0",
            ));
        }
        Ok(())
    }
}

/// One detected gaze event. The peak is the extremum over the event's open
/// interval; plateau ties keep the first index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionEvent {
    pub onset_s: f64,
    pub polarity: Polarity,
    pub peak_value_v: f64,
    pub peak_time_s: f64,
}

/// A closed event plus its open sample span `[start_index, end_index)`;
/// the detector's full output, from which [`digital_output`] derives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventSpan {
    pub event: DetectionEvent,
    pub start_index: usize,
    pub end_index: usize,
    pub close_s: f64,
}

#[derive(Debug, Clone, Copy)]
enum State {
    Idle,
    /// Qualifying samples seen, debounce not yet met.
    Candidate(Tracking),
    /// Event open (debounce met), accumulating its peak.
    Open(Tracking),
}

#[derive(Debug, Clone, Copy)]
struct Tracking {
    polarity: Polarity,
    count: u32,
    onset_s: f64,
    start_index: usize,
    peak_v: f64,
    peak_t: f64,
}

impl Tracking {
    fn update_peak(&mut self, t: f64, v: f64) {
        let better = match self.polarity {
            Polarity::Up => v > self.peak_v,
            Polarity::Down => v < self.peak_v,
        };
        if better {
            self.peak_v = v;
            self.peak_t = t;
        }
    }

    fn into_event(self) -> DetectionEvent {
        DetectionEvent {
            onset_s: self.onset_s,
            polarity: self.polarity,
            peak_value_v: self.peak_v,
            peak_time_s: self.peak_t,
        }
    }
}

/// Streaming event detector; one instance per stream.
#[derive(Debug, Clone)]
pub struct EventDetector {
    config: DetectorConfig,
    state: State,
    last_t: Option<f64>,
    index: usize,
    refractory_until: f64,
}

impl EventDetector {
    pub fn new(config: DetectorConfig) -> Result<Self> {
        config.validate()?;
        Ok(EventDetector {
            config,
            state: State::Idle,
            last_t: None,
            index: 0,
            refractory_until: f64::NEG_INFINITY,
        })
    }

    fn qualifies(&self, v: f64) -> Option<Polarity> {
        if v >= self.config.up_threshold_v {
            Some(Polarity::Up)
        } else if v <= self.config.down_threshold_v {
            Some(Polarity::Down)
        } else {
            None
        }
    }

    fn released(&self, polarity: Polarity, v: f64) -> bool {
        match polarity {
            Polarity::Up => v < self.config.up_threshold_v - self.config.hysteresis_v,
            Polarity::Down => v > self.config.down_threshold_v + self.config.hysteresis_v,
        }
    }

    /// Start or extend a candidate from an idle-like state.
    fn begin(&mut self, t: f64, v: f64) {
        if t < self.refractory_until {
            self.state = State::Idle;
            return;
        }
        self.state = match self.qualifies(v) {
            Some(polarity) => {
                let tracking = Tracking {
                    polarity,
                    count: 1,
                    onset_s: t,
                    start_index: self.index,
                    peak_v: v,
                    peak_t: t,
                };
                if self.config.debounce_samples <= 1 {
                    State::Open(tracking)
                } else {
                    State::Candidate(tracking)
                }
            }
            None => State::Idle,
        };
    }

    /// Feed one sample. Returns the event that closed on this sample, if any.
    pub fn push(&mut self, record: &SampleRecord) -> Result<Option<EventSpan>> {
        let (t, v) = (record.timestamp_s, record.volts);
        if let Some(last) = self.last_t {
            if t <= last {
                return Err(Error::Stream(format!(
                    "timestamps must be strictly increasing: {t} s after {last} s"
                )));
            }
        }
        self.last_t = Some(t);

        let mut closed = None;
        match self.state {
            State::Idle => self.begin(t, v),
            State::Candidate(mut tracking) => {
                if self.qualifies(v) == Some(tracking.polarity) {
                    tracking.count += 1;
                    tracking.update_peak(t, v);
                    self.state = if tracking.count >= self.config.debounce_samples {
                        State::Open(tracking)
                    } else {
                        State::Candidate(tracking)
                    };
                } else {
                    // candidate broken before debounce; this sample may seed
                    // a fresh candidate (possibly of the other polarity)
                    self.begin(t, v);
                }
            }
            State::Open(mut tracking) => {
                if self.released(tracking.polarity, v) {
                    self.refractory_until = t + self.config.refractory_s;
                    closed = Some(EventSpan {
                        event: tracking.into_event(),
                        start_index: tracking.start_index,
                        end_index: self.index,
                        close_s: t,
                    });
                    self.begin(t, v);
                } else {
                    tracking.update_peak(t, v);
                    self.state = State::Open(tracking);
                }
            }
        }
        self.index += 1;
        Ok(closed)
    }

    /// End of stream: an event still open closes here; an unconfirmed
    /// candidate is dropped.
    pub fn finish(&mut self) -> Option<EventSpan> {
        let span = match self.state {
            State::Open(tracking) => Some(EventSpan {
                event: tracking.into_event(),
                start_index: tracking.start_index,
                end_index: self.index,
                close_s: self.last_t.unwrap_or(0.0),
            }),
            _ => None,
        };
        self.state = State::Idle;
        span
    }
}

/// Detect all events in a stream, with their open spans.
pub fn detect_spans(stream: &[SampleRecord], config: &DetectorConfig) -> Result<Vec<EventSpan>> {
    let mut detector = EventDetector::new(*config)?;
    let mut spans = Vec::new();
    for record in stream {
        if let Some(span) = detector.push(record)? {
            spans.push(span);
        }
    }
    if let Some(span) = detector.finish() {
        spans.push(span);
    }
    Ok(spans)
}

/// Detect all events in a stream.
pub fn detect_events(
    stream: &[SampleRecord],
    config: &DetectorConfig,
) -> Result<Vec<DetectionEvent>> {
    Ok(detect_spans(stream, config)?
        .into_iter()
        .map(|s| s.event)
        .collect())
}

/// The literal digital front-end output: per-sample 1 while an UP event is
/// open, else 0.
pub fn digital_output(stream: &[SampleRecord], config: &DetectorConfig) -> Result<Vec<u8>> {
    let mut out = vec![0u8; stream.len()];
    for span in detect_spans(stream, config)? {
        if span.event.polarity == Polarity::Up {
            for bit in &mut out[span.start_index..span.end_index] {
                *bit = 1;
            }
        }
    }
    Ok(out)
}

/// Local maxima of the voltage stream with prominence at least
/// `min_prominence`. Plateau ties resolve to the first index; endpoints are
/// not peaks. Prominence follows the usual topographic definition: height
/// above the higher of the two valley floors bounding the peak.
pub fn find_peaks(stream: &[SampleRecord], min_prominence: f64) -> Vec<(f64, f64)> {
    let v: Vec<f64> = stream.iter().map(|r| r.volts).collect();
    let n = v.len();
    let mut peaks = Vec::new();
    let mut i = 1usize;
    while n >= 3 && i < n - 1 {
        if v[i] > v[i - 1] {
            // scan across a possible plateau
            let mut j = i;
            while j + 1 < n && v[j + 1] == v[i] {
                j += 1;
            }
            if j + 1 < n && v[j + 1] < v[i] {
                peaks.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }

    peaks
        .into_iter()
        .filter_map(|p| {
            let mut left_min = v[p];
            for &x in v[..p].iter().rev() {
                if x > v[p] {
                    break;
                }
                left_min = left_min.min(x);
            }
            let mut right_min = v[p];
            for &x in &v[p + 1..] {
                if x > v[p] {
                    break;
                }
                right_min = right_min.min(x);
            }
            let prominence = v[p] - left_min.max(right_min);
            (prominence >= min_prominence).then(|| (stream[p].timestamp_s, v[p]))
        })
        .collect()
}
