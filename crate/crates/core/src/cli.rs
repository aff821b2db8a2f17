//! Command-line entry point: simulate scenarios, process logs, emit bode
//! tables, and print metrics.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 data/parse error,
//! 3 internal invariant violation.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::afe::magnitude_response;
use crate::config::{ChainConfig, Preset};
use crate::error::{Error, Result};
use crate::pipeline::{events_to_csv, process_log, simulate, GroundTruth};
use crate::serial::{parse_serial_csv, write_serial_csv_string};
use crate::signal_model::GazeScenario;

#[derive(Debug, Parser)]
#[command(
    name = "eogforge",
    version,
    about = "EOG digital front-end simulator and signal-processing toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// Chain config JSON; defaults to $EOGFORGE_CONFIG, then built-in defaults.
    #[arg(long, env = "EOGFORGE_CONFIG")]
    config: Option<PathBuf>,

    /// Apply a named preset on top of the config (currently: fig6).
    #[arg(long)]
    preset: Option<String>,

    /// Override the noise seed from the config.
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ChainConfig> {
        let mut config = match &self.config {
            Some(path) => ChainConfig::load(path)?,
            None => ChainConfig::default(),
        };
        if let Some(preset) = &self.preset {
            let preset: Preset = preset.parse()?;
            config.apply_preset(preset);
        }
        if let Some(seed) = self.seed {
            config.noise.seed = seed;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a gaze scenario into a serial CSV log plus ground truth.
    Simulate {
        #[command(flatten)]
        config: ConfigArgs,

        /// Scenario JSON file.
        #[arg(long)]
        scenario: PathBuf,

        /// Output directory for serial.csv and truth.json.
        #[arg(long, default_value = ".")]
        output: PathBuf,
    },
    /// Detect events in a serial log and write events.csv + metrics.json.
    Process {
        /// Serial CSV log (recorded or simulated).
        log: PathBuf,

        #[command(flatten)]
        config: ConfigArgs,

        /// Ground-truth JSON from a simulation run; enables latency/accuracy.
        #[arg(long)]
        truth: Option<PathBuf>,

        /// Output directory.
        #[arg(long, default_value = ".")]
        output: PathBuf,
    },
    /// Print the analytic band-pass response as `f_hz,magnitude_db` rows.
    Bode {
        #[command(flatten)]
        config: ConfigArgs,

        #[arg(long, default_value_t = 0.05)]
        f_min: f64,

        #[arg(long, default_value_t = 128.0)]
        f_max: f64,

        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Compute metrics for a log; JSON to the output dir, table to stdout.
    Metrics {
        /// Serial CSV log.
        log: PathBuf,

        #[command(flatten)]
        config: ConfigArgs,

        /// Ground-truth JSON; enables latency/accuracy.
        #[arg(long)]
        truth: Option<PathBuf>,

        /// Output directory.
        #[arg(long, default_value = ".")]
        output: PathBuf,
    },
}

/// Parse arguments and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            config,
            scenario,
            output,
        } => cmd_simulate(&config.resolve()?, &scenario, &output),
        Command::Process {
            log,
            config,
            truth,
            output,
        } => cmd_process(&config.resolve()?, &log, truth.as_deref(), &output),
        Command::Bode {
            config,
            f_min,
            f_max,
            points,
        } => cmd_bode(&config.resolve()?, f_min, f_max, points),
        Command::Metrics {
            log,
            config,
            truth,
            output,
        } => cmd_metrics(&config.resolve()?, &log, truth.as_deref(), &output),
    }
}

fn load_scenario(path: &Path) -> Result<GazeScenario> {
    let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    let scenario: GazeScenario = serde_json::from_str(&text)?;
    scenario.validate()?;
    Ok(scenario)
}

fn load_log(path: &Path) -> Result<crate::serial::SerialLog> {
    let file = fs::File::open(path).map_err(|e| Error::file(path, e))?;
    let (log, _report) = parse_serial_csv(std::io::BufReader::new(file))?;
    Ok(log)
}

fn load_truth(path: &Path) -> Result<GroundTruth> {
    let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Write via a temp file in the target directory, renaming on success, so a
/// failure never leaves a partial file behind.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = tempfile::NamedTempFile::new_in(dir.unwrap_or(Path::new(".")))
        .map_err(|e| Error::file(path, e))?;
    tmp.write_all(contents.as_bytes())
        .map_err(|e| Error::file(path, e))?;
    tmp.persist(path).map_err(|e| Error::file(path, e.error))?;
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))
}

fn cmd_simulate(config: &ChainConfig, scenario_path: &Path, output: &Path) -> Result<()> {
    let scenario = load_scenario(scenario_path)?;
    let sim = simulate(config, &scenario)?;
    ensure_dir(output)?;
    write_atomic(
        &output.join("serial.csv"),
        &write_serial_csv_string(&sim.log),
    )?;
    write_atomic(
        &output.join("truth.json"),
        &serde_json::to_string_pretty(&sim.truth)?,
    )?;
    eprintln!(
        "simulated {} samples, {} ground-truth events, {} clipped samples (config {})",
        sim.log.records.len(),
        sim.truth.events.len(),
        sim.clipped_samples,
        &sim.truth.config_hash[..12],
    );
    Ok(())
}

fn cmd_process(
    config: &ChainConfig,
    log_path: &Path,
    truth_path: Option<&Path>,
    output: &Path,
) -> Result<()> {
    let log = load_log(log_path)?;
    let truth = truth_path.map(load_truth).transpose()?;
    let out = process_log(config, &log, truth.as_ref())?;
    ensure_dir(output)?;
    write_atomic(
        &output.join("events.csv"),
        &events_to_csv(&out.events, &out.report.provenance.config_hash),
    )?;
    write_atomic(
        &output.join("metrics.json"),
        &serde_json::to_string_pretty(&out.report)?,
    )?;
    print!("{}", out.report.render_table());
    Ok(())
}

fn cmd_bode(config: &ChainConfig, f_min: f64, f_max: f64, points: usize) -> Result<()> {
    if !f_min.is_finite() || !f_max.is_finite() || f_min <= 0.0 || f_min >= f_max {
        return Err(Error::invalid_config(
            "bode range",
            format!("need 0 < f_min < f_max, got {f_min}..{f_max}"),
        ));
    }
    if points < 2 {
        return Err(Error::invalid_config("points", "need at least 2"));
    }
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "# config_hash={}", config.hash())?;
    writeln!(stdout, "f_hz,magnitude_db")?;
    let log_min = f_min.log10();
    let log_max = f_max.log10();
    for i in 0..points {
        let f = 10f64.powf(log_min + (log_max - log_min) * i as f64 / (points - 1) as f64);
        let mag = magnitude_response(&config.afe, f)?;
        writeln!(stdout, "{f},{}", 20.0 * mag.log10())?;
    }
    Ok(())
}

fn cmd_metrics(
    config: &ChainConfig,
    log_path: &Path,
    truth_path: Option<&Path>,
    output: &Path,
) -> Result<()> {
    let log = load_log(log_path)?;
    let truth = truth_path.map(load_truth).transpose()?;
    let out = process_log(config, &log, truth.as_ref())?;
    ensure_dir(output)?;
    write_atomic(
        &output.join("metrics.json"),
        &serde_json::to_string_pretty(&out.report)?,
    )?;
    print!("{}", out.report.render_table());
    Ok(())
}
