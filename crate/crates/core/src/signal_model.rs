//! Gaze-angle stimulus generation and the corneal-retinal potential model.
//!
//! A [`GazeScenario`] is the ground truth: a list of saccades over a fixed
//! duration. [`render_gaze_trace`] realizes it as a sampled angle series and
//! [`gaze_to_differential`] maps angles to electrode-level differential
//! voltage through the linear CRP dipole model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear range of the CRP model; angles beyond this are rejected.
pub const MAX_GAZE_ANGLE_DEG: f64 = 30.0;

/// One rapid eye movement: hold, then ramp linearly to `target_angle_deg`
/// over `transition_duration_s`, then hold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Saccade {
    pub onset_s: f64,
    pub target_angle_deg: f64,
    pub transition_duration_s: f64,
}

impl Saccade {
    pub fn new(onset_s: f64, target_angle_deg: f64, transition_duration_s: f64) -> Result<Self> {
        let s = Saccade {
            onset_s,
            target_angle_deg,
            transition_duration_s,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.onset_s.is_finite() || self.onset_s < 0.0 {
            return Err(Error::InvalidScenario(format!(
                "saccade onset {} must be finite and >= 0",
                self.onset_s
            )));
        }
        if !self.target_angle_deg.is_finite() || self.target_angle_deg.abs() > MAX_GAZE_ANGLE_DEG {
            return Err(Error::InvalidScenario(format!(
                "target angle {} deg outside the linear range of +/-{} deg",
                self.target_angle_deg, MAX_GAZE_ANGLE_DEG
            )));
        }
        if !self.transition_duration_s.is_finite() || self.transition_duration_s <= 0.0 {
            return Err(Error::InvalidScenario(format!(
                "transition duration {} must be > 0",
                self.transition_duration_s
            )));
        }
        Ok(())
    }

    /// Time at which the ramp completes.
    pub fn end_s(&self) -> f64 {
        self.onset_s + self.transition_duration_s
    }
}

/// Stimulus ground truth: ordered saccades over `total_duration_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GazeScenario {
    pub total_duration_s: f64,
    #[serde(default)]
    pub initial_angle_deg: f64,
    #[serde(default)]
    pub saccades: Vec<Saccade>,
}

impl GazeScenario {
    pub fn validate(&self) -> Result<()> {
        if !self.total_duration_s.is_finite() || self.total_duration_s <= 0.0 {
            return Err(Error::InvalidScenario(format!(
                "total duration {} must be > 0",
                self.total_duration_s
            )));
        }
        if !self.initial_angle_deg.is_finite() || self.initial_angle_deg.abs() > MAX_GAZE_ANGLE_DEG
        {
            return Err(Error::InvalidScenario(format!(
                "initial angle {} deg outside the linear range of +/-{} deg",
                self.initial_angle_deg, MAX_GAZE_ANGLE_DEG
            )));
        }
        let mut prev_onset = f64::NEG_INFINITY;
        let mut prev_end = f64::NEG_INFINITY;
        for (i, s) in self.saccades.iter().enumerate() {
            s.validate()?;
            if s.onset_s <= prev_onset {
                return Err(Error::InvalidScenario(format!(
                    "saccade {} onset {} s is not strictly after the previous onset {} s",
                    i, s.onset_s, prev_onset
                )));
            }
            if s.onset_s < prev_end {
                return Err(Error::InvalidScenario(format!(
                    "saccade {} onset {} s overlaps the previous ramp ending at {} s",
                    i, s.onset_s, prev_end
                )));
            }
            if s.end_s() > self.total_duration_s {
                return Err(Error::InvalidScenario(format!(
                    "saccade {} ends at {} s, beyond the total duration {} s",
                    i,
                    s.end_s(),
                    self.total_duration_s
                )));
            }
            prev_onset = s.onset_s;
            prev_end = s.end_s();
        }
        Ok(())
    }

    /// Ground-truth event list: onset plus direction of each angle change.
    /// Saccades with no net angle change produce no event.
    pub fn stimulus_events(&self) -> Vec<(f64, crate::detect::Polarity)> {
        use crate::detect::Polarity;
        let mut events = Vec::with_capacity(self.saccades.len());
        let mut angle = self.initial_angle_deg;
        for s in &self.saccades {
            if s.target_angle_deg > angle {
                events.push((s.onset_s, Polarity::Up));
            } else if s.target_angle_deg < angle {
                events.push((s.onset_s, Polarity::Down));
            }
            angle = s.target_angle_deg;
        }
        events
    }
}

/// Sampled gaze-angle series in degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct GazeTrace {
    pub sample_rate_hz: f64,
    pub angles: Vec<f64>,
}

impl GazeTrace {
    pub fn validate(&self) -> Result<()> {
        if !self.sample_rate_hz.is_finite() || self.sample_rate_hz <= 0.0 {
            return Err(Error::invalid_config("trace.sample_rate_hz", "must be > 0"));
        }
        if let Some(a) = self
            .angles
            .iter()
            .find(|a| !a.is_finite() || a.abs() > MAX_GAZE_ANGLE_DEG)
        {
            return Err(Error::InvalidScenario(format!(
                "trace angle {a} deg outside the linear range"
            )));
        }
        Ok(())
    }
}

/// Linear corneal-retinal potential model: differential voltage is
/// `sensitivity_uv_per_deg` microvolts per degree of gaze angle.
///
/// The default sensitivity maps the +/-30 degree extremes onto the 3500 uV
/// upper end of the EOG amplitude range; `max_amplitude_uv` records that
/// configured extreme and must stay consistent with the sensitivity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrpModel {
    pub sensitivity_uv_per_deg: f64,
    pub max_amplitude_uv: f64,
}

impl CrpModel {
    /// Smallest EOG amplitude the literature range quotes, in microvolts.
    pub const MIN_AMPLITUDE_UV: f64 = 50.0;

    /// Model with the given sensitivity; the max amplitude follows from it.
    pub fn with_sensitivity(sensitivity_uv_per_deg: f64) -> Result<Self> {
        let m = CrpModel {
            sensitivity_uv_per_deg,
            max_amplitude_uv: sensitivity_uv_per_deg * MAX_GAZE_ANGLE_DEG,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.sensitivity_uv_per_deg.is_finite() || self.sensitivity_uv_per_deg <= 0.0 {
            return Err(Error::invalid_config(
                "crp.sensitivity_uv_per_deg",
                "must be > 0",
            ));
        }
        let implied = self.sensitivity_uv_per_deg * MAX_GAZE_ANGLE_DEG;
        if (implied - self.max_amplitude_uv).abs() > 1e-9 * self.max_amplitude_uv.abs().max(1.0) {
            return Err(Error::invalid_config(
                "crp.max_amplitude_uv",
                format!(
                    "inconsistent with sensitivity: {} uV/deg x {} deg = {} uV, configured {} uV",
                    self.sensitivity_uv_per_deg, MAX_GAZE_ANGLE_DEG, implied, self.max_amplitude_uv
                ),
            ));
        }
        Ok(())
    }
}

impl Default for CrpModel {
    fn default() -> Self {
        CrpModel {
            sensitivity_uv_per_deg: 3500.0 / MAX_GAZE_ANGLE_DEG,
            max_amplitude_uv: 3500.0,
        }
    }
}

/// Electrode-level signal: differential voltage plus a separate common-mode
/// component, both in volts at the same sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSignal {
    pub sample_rate_hz: f64,
    pub differential_v: Vec<f64>,
    pub common_mode_v: Vec<f64>,
}

impl RawSignal {
    pub fn len(&self) -> usize {
        self.differential_v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.differential_v.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.differential_v.len() != self.common_mode_v.len() {
            return Err(Error::Internal(format!(
                "raw signal length mismatch: {} differential vs {} common-mode samples",
                self.differential_v.len(),
                self.common_mode_v.len()
            )));
        }
        if !self.sample_rate_hz.is_finite() || self.sample_rate_hz <= 0.0 {
            return Err(Error::invalid_config(
                "signal.sample_rate_hz",
                "must be > 0",
            ));
        }
        Ok(())
    }
}

/// Realize a scenario as a sampled angle trace.
///
/// The angle holds at its previous value, ramps linearly to each saccade's
/// target over its transition window, then holds again. The trace has
/// `round(total_duration_s * sample_rate_hz)` samples at `t = i / fs`.
pub fn render_gaze_trace(scenario: &GazeScenario, sample_rate_hz: f64) -> Result<GazeTrace> {
    scenario.validate()?;
    if !sample_rate_hz.is_finite() || sample_rate_hz <= 0.0 {
        return Err(Error::invalid_config("sample_rate_hz", "must be > 0"));
    }
    let n = (scenario.total_duration_s * sample_rate_hz).round() as usize;
    let mut angles = Vec::with_capacity(n);

    let mut prev_target = scenario.initial_angle_deg;
    let mut next = 0usize; // index of the first saccade not yet completed
    for i in 0..n {
        let t = i as f64 / sample_rate_hz;
        while next < scenario.saccades.len() && t >= scenario.saccades[next].end_s() {
            prev_target = scenario.saccades[next].target_angle_deg;
            next += 1;
        }
        let angle = match scenario.saccades.get(next) {
            Some(s) if t >= s.onset_s => {
                let progress = (t - s.onset_s) / s.transition_duration_s;
                prev_target + (s.target_angle_deg - prev_target) * progress
            }
            _ => prev_target,
        };
        angles.push(angle);
    }
    Ok(GazeTrace {
        sample_rate_hz,
        angles,
    })
}

/// Map a gaze trace onto electrode differential voltage.
///
/// `differential[i] = sensitivity * angle[i]`, in volts; the common-mode
/// channel starts all-zero (noise injection adds to it separately).
pub fn gaze_to_differential(trace: &GazeTrace, model: &CrpModel) -> Result<RawSignal> {
    trace.validate()?;
    model.validate()?;
    let volts_per_deg = model.sensitivity_uv_per_deg * 1e-6;
    let differential_v: Vec<f64> = trace.angles.iter().map(|a| volts_per_deg * a).collect();
    let common_mode_v = vec![0.0; differential_v.len()];
    Ok(RawSignal {
        sample_rate_hz: trace.sample_rate_hz,
        differential_v,
        common_mode_v,
    })
}
