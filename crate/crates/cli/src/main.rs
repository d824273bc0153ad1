//! `tactile`: simulate the cloth display, drive the simulated device, run and
//! analyze experiment sessions, or serve the HTTP API.

mod commands;
mod session;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tactile_core::device::DeviceLimits;
use tactile_core::physics::{MaterialStack, SafetyEnvelope};
use tactile_core::units::{parse_area, parse_length};

#[derive(Debug, Parser)]
#[command(name = "tactile", version, about = "Electrostatic cloth display toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the force trace for one drive setting.
    Simulate(SimulateArgs),
    /// Check drive currents against the safety limit.
    Safety(SafetyArgs),
    /// Line-protocol REPL against the simulated device.
    Drive(DriveArgs),
    /// Run a terminal-driven experiment session, writing JSONL.
    Session(SessionArgs),
    /// ART ANOVA report over session JSONL or score CSV files.
    Analyze(AnalyzeArgs),
    /// Start the HTTP service.
    Serve(ServeArgs),
}

/// Material stack overrides; unset values keep the fingertip defaults.
#[derive(Debug, Clone, Args)]
struct StackArgs {
    /// Contact area, e.g. 100mm2 or 1e-4 (m²).
    #[arg(long, value_parser = |s: &str| parse_area(s).map_err(|e| e.to_string()))]
    area: Option<f64>,
    /// Insulator thickness, e.g. 35um or 3.5e-5 (m).
    #[arg(long, value_parser = |s: &str| parse_length(s).map_err(|e| e.to_string()))]
    thickness: Option<f64>,
    /// Relative permittivity of the insulator.
    #[arg(long)]
    permittivity: Option<f64>,
    /// Friction coefficient.
    #[arg(long)]
    mu: Option<f64>,
    /// Series resistance of the high-voltage path in ohms [default: 1e6].
    #[arg(long)]
    series_resistance: Option<f64>,
    /// Switch rise time in seconds for the peak-current bound [default: 1e-4].
    #[arg(long)]
    rise_time: Option<f64>,
}

impl StackArgs {
    fn stack(&self) -> Result<MaterialStack, CliError> {
        let d = MaterialStack::default();
        MaterialStack::new(
            self.area.unwrap_or(d.contact_area),
            self.thickness.unwrap_or(d.insulator_thickness),
            self.permittivity.unwrap_or(d.insulator_rel_permittivity),
            self.mu.unwrap_or(d.friction_coeff),
        )
        .map_err(|e| CliError::Validation(e.to_string()))
    }

    fn limits(&self) -> Result<DeviceLimits, CliError> {
        let d = DeviceLimits::default();
        let r = self.series_resistance.unwrap_or(d.envelope.series_resistance);
        let rise = self.rise_time.unwrap_or(d.envelope.rise_time);
        for (name, value) in [("series resistance", r), ("rise time", rise)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(CliError::Validation(format!("{name} must be > 0, got {value}")));
            }
        }
        let envelope = SafetyEnvelope { series_resistance: r, rise_time: rise, ..d.envelope };
        Ok(DeviceLimits { stack: self.stack()?, envelope, ..d })
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Drive voltage in volts.
    #[arg(long)]
    v: f64,
    /// Drive frequency in hertz (optional at 0 V).
    #[arg(long)]
    f: Option<f64>,
    /// Duration in milliseconds.
    #[arg(long, default_value_t = 100.0)]
    ms: f64,
    /// Sample rate in hertz.
    #[arg(long)]
    rate: Option<f64>,
    /// Write the trace CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    stack: StackArgs,
}

#[derive(Debug, Args)]
struct SafetyArgs {
    /// Check all nine grid conditions.
    #[arg(long, conflicts_with_all = ["v", "f"])]
    sweep: bool,
    /// Single voltage to check.
    #[arg(long, requires = "f")]
    v: Option<f64>,
    /// Single frequency to check.
    #[arg(long, requires = "v")]
    f: Option<f64>,
    /// Write the sweep CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    stack: StackArgs,
}

#[derive(Debug, Args)]
struct DriveArgs {
    #[command(flatten)]
    stack: StackArgs,
}

#[derive(Debug, Args)]
struct SessionArgs {
    /// Participant identifier
    #[arg(long)]
    participant: String,
    /// Seed for the condition order
    #[arg(long)]
    seed: u64,
    /// Output JSONL; defaults to <data-dir>/<participant>-<seed>.jsonl.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for session files; defaults to the working directory
    #[arg(long, env = "TACTILE_DATA_DIR")]
    data_dir: Option<PathBuf>,
    /// Hide the applied voltage and frequency from the terminal.
    #[arg(long)]
    blinded: bool,
    #[command(flatten)]
    stack: StackArgs,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Session `.jsonl` files or `subject,voltage,frequency,property,score` CSV files.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Property to analyze, or `all`.
    #[arg(long, default_value = "all")]
    property: String,
    /// Write the ANOVA CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    /// Address to listen on
    #[arg(long, default_value = "127.0.0.1:8080")]
    bind: std::net::SocketAddr,
    /// Permit binding a non-loopback address.
    #[arg(long)]
    allow_external: bool,
    /// Directory for session files; sessions stay in memory when unset
    #[arg(long, env = "TACTILE_DATA_DIR")]
    data_dir: Option<PathBuf>,
    /// Directory of console assets to serve at `/`.
    #[arg(long)]
    assets: Option<PathBuf>,
    #[command(flatten)]
    stack: StackArgs,
}

#[derive(Debug)]
enum CliError {
    /// Bad input: exit 1.
    Validation(String),
    /// Failure while running: exit 2.
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    // die quietly on a closed pipe, as `tactile safety --sweep | head` expects
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Safety(a) => commands::safety(a),
        Command::Drive(a) => commands::drive(a),
        Command::Session(a) => session::run(a),
        Command::Analyze(a) => commands::analyze(a),
        Command::Serve(a) => commands::serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
