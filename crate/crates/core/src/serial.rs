//! The Arduino-style serial CSV log format.
//!
//! Recorded hardware sessions and simulator output share this one
//! representation: `#`-prefixed `key=value` header lines, then
//! `timestamp_ms,code` rows, LF line endings, no quoting. Headers may be
//! absent — hardware logs without them parse with the stock defaults
//! (256 Hz, 5.0 V reference, 10 bits).
//!
//! ```text
//! # bits=10
//! # sample_rate_hz=256
//! # v_ref=5
//! 0,512
//! 4,513
//! ```

use std::io::{BufRead, Write};

use crate::adc::{code_to_volts, AdcConfig, SampleRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SerialLog {
    pub sample_rate_hz: f64,
    pub v_ref: f64,
    pub bits: u8,
    /// Free-form origin tag; the simulator stores `sim:<config-hash>` here.
    pub source: Option<String>,
    pub records: Vec<SampleRecord>,
}

impl Default for SerialLog {
    fn default() -> Self {
        SerialLog {
            sample_rate_hz: 256.0,
            v_ref: 5.0,
            bits: 10,
            source: None,
            records: Vec::new(),
        }
    }
}

impl SerialLog {
    /// The ADC settings implied by the header.
    pub fn adc_config(&self) -> AdcConfig {
        AdcConfig {
            v_ref: self.v_ref,
            bits: self.bits,
            sample_rate_hz: self.sample_rate_hz,
            ..AdcConfig::default()
        }
    }

    pub fn max_code(&self) -> u16 {
        ((1u32 << self.bits) - 1) as u16
    }

    pub fn volts(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.volts).collect()
    }
}

/// Non-fatal observations from parsing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseReport {
    /// The file held headers (or nothing) but no data rows.
    pub empty_data: bool,
}

/// Parse a serial CSV log line by line; memory use is independent of file
/// length. Errors carry the 1-based line number and the offending text.
pub fn parse_serial_csv<R: BufRead>(reader: R) -> Result<(SerialLog, ParseReport)> {
    let mut log = SerialLog::default();
    let mut meta_locked = false;
    let mut last_ms: Option<u64> = None;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            // header (or plain comment) line; headers after the first data
            // row no longer apply and are treated as comments
            if meta_locked {
                continue;
            }
            let Some((key, value)) = rest.split_once('=') else {
                continue;
            };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "sample_rate_hz" => {
                    log.sample_rate_hz = value.parse().map_err(|_| {
                        Error::parse(line_no, "bad sample_rate_hz header value", line)
                    })?;
                    if !log.sample_rate_hz.is_finite() || log.sample_rate_hz <= 0.0 {
                        return Err(Error::parse(line_no, "sample_rate_hz must be > 0", line));
                    }
                }
                "v_ref" => {
                    log.v_ref = value
                        .parse()
                        .map_err(|_| Error::parse(line_no, "bad v_ref header value", line))?;
                    if !log.v_ref.is_finite() || log.v_ref <= 0.0 {
                        return Err(Error::parse(line_no, "v_ref must be > 0", line));
                    }
                }
                "bits" => {
                    log.bits = value
                        .parse()
                        .map_err(|_| Error::parse(line_no, "bad bits header value", line))?;
                    if !(1..=16).contains(&log.bits) {
                        return Err(Error::parse(line_no, "bits must be in 1..=16", line));
                    }
                }
                "source" => log.source = Some(value.to_string()),
                _ => {} // unknown headers are tolerated
            }
            continue;
        }

        meta_locked = true;
        let Some((ms_text, code_text)) = line.split_once(',') else {
            return Err(Error::parse(line_no, "expected `timestamp_ms,code`", line));
        };
        let ms: u64 = ms_text
            .trim()
            .parse()
            .map_err(|_| Error::parse(line_no, "bad timestamp_ms", line))?;
        let code: u32 = code_text
            .trim()
            .parse()
            .map_err(|_| Error::parse(line_no, "bad code", line))?;
        if code > log.max_code() as u32 {
            return Err(Error::parse(
                line_no,
                format!("code {code} out of range for {} bits", log.bits),
                line,
            ));
        }
        if let Some(prev) = last_ms {
            if ms < prev {
                return Err(Error::parse(
                    line_no,
                    format!("timestamp {ms} ms decreased below {prev} ms"),
                    line,
                ));
            }
        }
        last_ms = Some(ms);
        let code = code as u16;
        log.records.push(SampleRecord {
            timestamp_s: ms as f64 / 1000.0,
            code,
            volts: code_to_volts(code, &log.adc_config()),
        });
    }

    let report = ParseReport {
        empty_data: log.records.is_empty(),
    };
    Ok((log, report))
}

pub fn parse_serial_csv_str(text: &str) -> Result<(SerialLog, ParseReport)> {
    parse_serial_csv(text.as_bytes())
}

/// Write a log in the canonical format: header keys in alphabetical order,
/// timestamps rounded to integer milliseconds. `parse(write(log))`
/// reproduces the log exactly when its timestamps are millisecond-aligned.
pub fn write_serial_csv<W: Write>(log: &SerialLog, mut w: W) -> std::io::Result<()> {
    write!(
        w,
        "# bits={}\n# sample_rate_hz={}\n",
        log.bits, log.sample_rate_hz
    )?;
    if let Some(source) = &log.source {
        writeln!(w, "# source={source}")?;
    }
    writeln!(w, "# v_ref={}", log.v_ref)?;
    for r in &log.records {
        let ms = (r.timestamp_s * 1000.0).round() as u64;
        writeln!(w, "{ms},{}", r.code)?;
    }
    Ok(())
}

pub fn write_serial_csv_string(log: &SerialLog) -> String {
    let mut buf = Vec::new();
    write_serial_csv(log, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("log text is ASCII")
}
