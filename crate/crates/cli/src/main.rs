//! `frontlab`: spectra, traveling waves and front simulations from a JSON config.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use frontlab_core::harness::{
    check_artifact_hashes, cmd_alpha_bar, cmd_simulate, cmd_spectrum, cmd_speed, cmd_wave, select,
    verify, CommandOutcome, ExperimentConfig, Presets,
};
use frontlab_core::Error;
use log::{info, warn};
use serde_json::json;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "frontlab",
    version,
    about = "Fronts of a trait-structured nonlocal Fisher-KPP model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config (JSON). For `verify`, a directory of preset files.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory; overrides `output` from the config.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Criteria run by `verify`: a group (spectrum, wave, cauchy, invasion), an id, or a comma list.
    #[arg(long, global = true, value_name = "NAME")]
    filter: Option<String>,

    /// Worker threads.
    #[arg(long, global = true, env = "FRONTLAB_THREADS", value_name = "N")]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenpairs of the trait operator.
    Spectrum,
    /// Critical selection intensity.
    AlphaBar,
    /// Traveling-wave profiles for the configured speeds.
    Wave,
    /// Cauchy problem with diagnostics, snapshots and front tracking.
    Simulate,
    /// Front trace and speed estimate only.
    Speed,
    /// Acceptance suite against the pinned presets.
    Verify,
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Parameter(_) => "parameter",
        Error::Validation(_) => "validation",
        Error::Config(_) => "config",
        Error::Json(_) => "json",
        Error::Io(_) => "io",
        Error::Eigensolver { .. } => "eigensolver",
        Error::NoCriticalIntensity { .. } => "no_critical_intensity",
        Error::DegenerateKernel(_) => "degenerate_kernel",
        Error::NoFiniteSpeed(_) => "no_finite_speed",
        Error::BelowCriticalSpeed { .. } => "below_critical_speed",
        Error::Newton { .. } => "newton",
        Error::GridMismatch(_) => "grid_mismatch",
        Error::Numeric { .. } => "numeric",
    }
}

fn fail(e: &Error, code: u8) -> ExitCode {
    let body = json!({ "error": error_kind(e), "message": e.to_string(), "exit_code": code });
    eprintln!("{body}");
    ExitCode::from(code)
}

fn load(path: Option<&Path>) -> Result<ExperimentConfig, Error> {
    let path = path.ok_or_else(|| Error::Config("--config PATH is required".into()))?;
    ExperimentConfig::load(path).map_err(|e| match e {
        Error::Io(io) => Error::Config(format!("cannot read {}: {io}", path.display())),
        other => other,
    })
}

fn out_dir(cli: &Cli, cfg: Option<&ExperimentConfig>) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.and_then(|c| c.output.clone()))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    if let Command::Verify = cli.command {
        let presets = match &cli.config {
            Some(dir) => Presets::from_dir(dir)?,
            None => Presets::builtin()?,
        };
        let ids = select(cli.filter.as_deref())?;
        let out = out_dir(cli, None);
        let verdict = verify(&presets, &ids, Some(&out))?;
        let _ = write!(std::io::stdout().lock(), "{}", verdict.table());
        return Ok(if verdict.all_passed() {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(EXIT_NUMERIC)
        });
    }
    if cli.filter.is_some() {
        warn!("--filter only applies to verify");
    }
    let cfg = load(cli.config.as_deref())?;
    let out = out_dir(cli, Some(&cfg));
    let command: fn(&ExperimentConfig, &Path) -> frontlab_core::Result<CommandOutcome> =
        match cli.command {
            Command::Spectrum => cmd_spectrum,
            Command::AlphaBar => cmd_alpha_bar,
            Command::Wave => cmd_wave,
            Command::Simulate => cmd_simulate,
            Command::Speed => cmd_speed,
            Command::Verify => unreachable!("handled above"),
        };
    let outcome = command(&cfg, &out)?;
    if let Err(e) = check_artifact_hashes(&out) {
        warn!("{}: {e}", out.display());
    }
    let _ = writeln!(
        std::io::stdout().lock(),
        "{}",
        serde_json::to_string_pretty(&outcome.report)?
    );
    if outcome.partial {
        warn!("some requested items were rejected; see report.json");
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            return fail(
                &Error::Config("--threads must be positive".into()),
                EXIT_CONFIG,
            );
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            return fail(&Error::Config(format!("thread pool: {e}")), EXIT_CONFIG);
        }
    }
    let start = Instant::now();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) if e.is_config() => fail(&e, EXIT_CONFIG),
        Err(e) => fail(&e, EXIT_NUMERIC),
    };
    info!("elapsed {:.2}s", start.elapsed().as_secs_f64());
    code
}
