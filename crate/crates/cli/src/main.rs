//! `diracspec` command-line driver.

mod commands;
mod input;
mod output;
mod parse;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::output::{CliError, RunConfig};

/// Worker-count override for the rayon pool.
pub const WORKERS_ENV: &str = "DIRACSPEC_WORKERS";

#[derive(Parser, Debug)]
#[command(name = "diracspec", version, about = "Numerics for free massless Dirac operators", args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for every random draw of the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// JSON object whose keys override the command's flags.
    #[arg(long, global = true)]
    config: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Clifford generators and the exact relation check.
    Clifford(CliffordArgs),
    /// Free Green kernel at one point pair.
    Green(GreenArgs),
    /// Free Green kernel along the ray y = x + t·dir.
    Scan(ScanArgs),
    /// Discretized Birman-Schwinger operator.
    Bs(BsArgs),
    /// Random audit of the regularized-determinant product formula.
    DetAudit(DetAuditArgs),
    /// Spectral shift function of a matrix pair on a λ grid.
    Ssf(SsfArgs),
    /// Abel transform of a spectral shift function.
    Abel(AbelArgs),
    /// Witten index of a random rectangular matrix.
    Witten(WittenArgs),
    /// Zero-energy classification of U_V + V₁G₀(0)V₁*.
    Threshold(ThresholdArgs),
    /// Timings of the core kernels.
    Bench(BenchArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct CliffordArgs {
    #[arg(long)]
    pub n: usize,
    /// Include the exact relation report; exit 1 if it fails.
    #[arg(long)]
    pub check: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct GreenArgs {
    #[arg(long)]
    pub n: usize,
    /// Spectral parameter `a+bi` with Im ≥ 0; `0` selects the z → 0 limit.
    #[arg(long, allow_hyphen_values = true)]
    pub z: String,
    /// Comma-separated coordinates.
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
    #[arg(long, allow_hyphen_values = true)]
    pub y: String,
    /// Order of the z-derivative.
    #[arg(long)]
    pub deriv: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct ScanArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub z: String,
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
    /// Direction of the ray; normalized internally.
    #[arg(long, allow_hyphen_values = true)]
    pub dir: String,
    /// Ray parameters as a:b:steps.
    #[arg(long, allow_hyphen_values = true)]
    pub t: String,
    #[arg(long)]
    pub deriv: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct BsArgs {
    #[arg(long)]
    pub n: usize,
    /// Potential specification file.
    #[arg(long)]
    pub potential: String,
    #[arg(long, allow_hyphen_values = true)]
    pub z: String,
    /// Nodes per axis.
    #[arg(long)]
    pub m: usize,
    /// Half-width of the truncation box.
    #[arg(long = "R")]
    pub r: f64,
    /// Report the k eigenvalues of largest modulus.
    #[arg(long)]
    pub eig: Option<usize>,
    #[arg(long)]
    pub schatten: Option<f64>,
    /// Include the assembled matrix.
    #[arg(long)]
    pub dump: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct DetAuditArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 6)]
    pub dim: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Krein,
    Eqmain,
    Counting,
}

#[derive(Args, Debug, Serialize)]
pub struct SsfArgs {
    /// Pair file {"s0": [[[re,im],…],…], "v": …}.
    #[arg(long)]
    pub pair: String,
    /// λ grid as a:b:steps.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
    #[arg(long, value_enum, default_value_t = MethodArg::Krein)]
    pub method: MethodArg,
    /// Order for the eqmain method.
    #[arg(long, default_value_t = 1)]
    pub m: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct AbelArgs {
    /// `step`, `sign`, `indicator:a:b`, or an SSF table file.
    #[arg(long)]
    pub xi: String,
    /// Comma-separated positive λ values.
    #[arg(long)]
    pub lambda: Option<String>,
    /// Also report the λ → 0 limit.
    #[arg(long)]
    pub limit: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct WittenArgs {
    #[arg(long)]
    pub rows: usize,
    #[arg(long)]
    pub cols: usize,
    #[arg(long, default_value_t = 1)]
    pub k: u32,
}

#[derive(Args, Debug, Serialize)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub potential: String,
    #[arg(long)]
    pub m: usize,
    #[arg(long = "R")]
    pub r: f64,
    /// Amplitude multipliers as a0:a1:steps.
    #[arg(long, allow_hyphen_values = true)]
    pub sweep: Option<String>,
    #[arg(long, default_value_t = diracspec::resolvalg::THRESHOLD_TOL)]
    pub tol: f64,
    /// Compare against a grid with twice the nodes per axis.
    #[arg(long)]
    pub refine: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
}

fn init_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{WORKERS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size worker pool: {e}")))
}

fn config_path(argv: &[String]) -> Option<String> {
    argv.iter().enumerate().find_map(|(i, a)| {
        a.strip_prefix("--config=").map(str::to_string).or_else(|| (a == "--config").then(|| argv.get(i + 1).cloned()).flatten())
    })
}

fn clap_error(e: clap::Error) -> CliError {
    let detail = e.render().to_string();
    let detail = detail.lines().next().unwrap_or_default().trim_start_matches("error: ").to_string();
    match e.kind() {
        ErrorKind::MissingRequiredArgument => CliError::Usage(format!("missing required parameter: {detail}")),
        _ => CliError::Usage(detail),
    }
}

fn run() -> Result<i32, CliError> {
    let mut argv: Vec<String> = std::env::args().collect();
    if let Some(path) = config_path(&argv) {
        argv.extend(input::config_args(&path)?);
    }
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return Ok(0);
        }
        Err(e) => return Err(clap_error(e)),
    };
    init_workers()?;
    let (name, params) = match &cli.command {
        Command::Clifford(a) => ("clifford", output::to_value(a)?),
        Command::Green(a) => ("green", output::to_value(a)?),
        Command::Scan(a) => ("scan", output::to_value(a)?),
        Command::Bs(a) => ("bs", output::to_value(a)?),
        Command::DetAudit(a) => ("det-audit", output::to_value(a)?),
        Command::Ssf(a) => ("ssf", output::to_value(a)?),
        Command::Abel(a) => ("abel", output::to_value(a)?),
        Command::Witten(a) => ("witten", output::to_value(a)?),
        Command::Threshold(a) => ("threshold", output::to_value(a)?),
        Command::Bench(a) => ("bench", output::to_value(a)?),
    };
    let csv_capable = matches!(cli.command, Command::Green(_) | Command::Scan(_));
    if cli.format == Format::Csv && !csv_capable {
        return output::usage(format!("--format csv is only available for green and scan, not {name}"));
    }
    let config = RunConfig {
        command: name.into(),
        params,
        seed: cli.seed,
        out: cli.out.clone(),
        format: if cli.format == Format::Csv { "csv" } else { "json" }.into(),
    };
    let outcome = match &cli.command {
        Command::Clifford(a) => commands::clifford(a),
        Command::Green(a) => commands::green(a),
        Command::Scan(a) => commands::scan(a),
        Command::Bs(a) => commands::bs(a),
        Command::DetAudit(a) => commands::det_audit(a, cli.seed),
        Command::Ssf(a) => commands::ssf(a),
        Command::Abel(a) => commands::abel(a),
        Command::Witten(a) => commands::witten(a, cli.seed),
        Command::Threshold(a) => commands::threshold(a),
        Command::Bench(a) => commands::bench(a, cli.seed),
    }?;
    output::emit(&config, &outcome)?;
    Ok(match outcome.violation {
        Some(msg) => {
            eprintln!("{}", serde_json::json!({ "violation": msg }));
            1
        }
        None => 0,
    })
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.code() as u8)
        }
    }
}
