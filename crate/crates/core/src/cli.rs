//! Command line front end.
//!
//! Exit codes: 0 success, 1 invalid configuration or failed validation,
//! 2 runtime failure (I/O, simulation error).

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::config::{ConfigError, ConfigFile};
use crate::geometry::max_coverage_fraction;
use crate::montecarlo::{altitude_sweep, optimize_boresight, with_threads, Scenario};
use crate::output::{write_records, CoverageRecord, ScanRecord, SweepRecord, COVERAGE_SCHEMA};
use crate::validate::{run_suite, SuiteOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

/// Environment variable overriding the worker thread count.
pub const THREADS_ENV: &str = "UAVNOMA_THREADS";

#[derive(Debug, Parser)]
#[command(name = "uavnoma", version, about = "UAV mmWave NOMA outage Monte Carlo simulator")]
pub struct Cli {
    /// Worker threads (defaults to all cores)
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Outage probabilities and sum rates versus altitude
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Required vertical angle and radiated share of the user region versus altitude
    Coverage {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sum rate over the boresight grid at one altitude
    Scan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        altitude: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the built-in oracle checks
    Validate {
        #[arg(long, default_value_t = 100_000)]
        drops: u64,
        #[arg(long, default_value_t = 20_171_016)]
        seed: u64,
    },
}

#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Runtime(String),
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => EXIT_VALIDATION,
            Failure::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => Failure::Runtime(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

/// Sidecar record describing how an output file was produced.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub command: &'a str,
    pub config_path: &'a Path,
    pub output_path: &'a Path,
    pub seed: u64,
    pub unix_time: u64,
    pub config: &'a ConfigFile,
}

impl RunManifest<'_> {
    pub fn sidecar_path(out: &Path) -> PathBuf {
        let mut name = out.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }

    fn write(&self) -> Result<(), Failure> {
        let file = File::create(Self::sidecar_path(self.output_path)).map_err(runtime)?;
        serde_json::to_writer_pretty(BufWriter::new(file), self).map_err(runtime)
    }
}

fn load(path: &Path) -> Result<(ConfigFile, Scenario), Failure> {
    let file = ConfigFile::load(path)?;
    let scenario = file.scenario()?;
    scenario.validate().map_err(|e| Failure::Validation(e.to_string()))?;
    Ok((file, scenario))
}

fn write_csv<T: Serialize>(out: &Path, records: &[T]) -> Result<(), Failure> {
    let file = File::create(out).map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", out.display())))?;
    write_records(BufWriter::new(file), records).map_err(runtime)
}

fn unix_time() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn cmd_sweep(config: &Path, out: &Path, threads: Option<usize>) -> Result<(), Failure> {
    let (file, scenario) = load(config)?;
    let rows = with_threads(threads, || altitude_sweep(&scenario))??;
    let records: Vec<SweepRecord> = rows.iter().map(|r| SweepRecord::new(r, file.ptx_dbm)).collect();
    write_csv(out, &records)?;
    RunManifest {
        command: "sweep",
        config_path: config,
        output_path: out,
        seed: file.seed,
        unix_time: unix_time(),
        config: &file,
    }
    .write()
}

pub fn cmd_coverage(config: &Path, out: &Path) -> Result<(), Failure> {
    let (file, scenario) = load(config)?;
    let mut records = Vec::with_capacity(scenario.altitudes.len());
    for &h in &scenario.altitudes {
        let phi_r = scenario.required_angle(h)?;
        records.push(CoverageRecord {
            schema: COVERAGE_SCHEMA,
            h_m: h,
            phi_r_deg: phi_r.to_degrees(),
            phi_e_deg: file.phi_e_deg,
            scanning: u8::from(phi_r > scenario.beamwidth),
            coverage_pct: 100.0 * max_coverage_fraction(h, &scenario.region, scenario.beamwidth)?,
        });
    }
    write_csv(out, &records)?;
    RunManifest {
        command: "coverage",
        config_path: config,
        output_path: out,
        seed: file.seed,
        unix_time: unix_time(),
        config: &file,
    }
    .write()
}

pub fn cmd_scan(config: &Path, altitude: f64, out: &Path, threads: Option<usize>) -> Result<(), Failure> {
    let (file, scenario) = load(config)?;
    if !(altitude.is_finite() && altitude > 0.0) {
        return Err(Failure::Validation(format!("invalid `altitude`: must be > 0, got {altitude}")));
    }
    if !scenario.is_scanning(altitude)? {
        return Err(Failure::Validation(format!(
            "invalid `altitude`: the beam covers the whole user region at {altitude} m, nothing to scan"
        )));
    }
    let scan = with_threads(threads, || {
        optimize_boresight(&scenario, altitude, scenario.grid_points, scenario.drops)
    })??;
    write_csv(out, &ScanRecord::from_scan(&scan))?;
    println!("D* = {:.4} m at h = {altitude} m", scan.d_star());
    RunManifest {
        command: "scan",
        config_path: config,
        output_path: out,
        seed: file.seed,
        unix_time: unix_time(),
        config: &file,
    }
    .write()
}

pub fn cmd_validate(drops: u64, seed: u64, threads: Option<usize>) -> Result<(), Failure> {
    let opts = SuiteOptions {
        drops,
        seed,
        thresholds: None,
    };
    let report = with_threads(threads, || run_suite(&opts))??;
    println!("{report}");
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Validation("validation suite failed".into()))
    }
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Sweep { config, out } => cmd_sweep(&config, &out, cli.threads),
        Command::Coverage { config, out } => cmd_coverage(&config, &out),
        Command::Scan { config, altitude, out } => cmd_scan(&config, altitude, &out, cli.threads),
        Command::Validate { drops, seed } => cmd_validate(drops, seed, cli.threads),
    }
}

pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            match &f {
                Failure::Validation(msg) => eprintln!("error: {msg}"),
                Failure::Runtime(msg) => eprintln!("runtime error: {msg}"),
            }
            f.exit_code()
        }
    }
}
