//! `rankwave`: config-driven runs of the wave-operator toolkit.
//!
//! Exit status: 0 on success, 2 when the input is rejected, 3 when the
//! numerics fail (artifacts written so far are kept and the manifest says so),
//! 1 on I/O errors.

mod artifacts;
mod commands;
mod config;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use artifacts::Run;
use config::RunConfig;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numeric(String),
    Io(String),
}

impl From<rankwave::Error> for Failure {
    fn from(e: rankwave::Error) -> Self {
        if e.is_numeric() {
            Failure::Numeric(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Numeric(_) => 3,
            Failure::Io(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numeric(m) | Failure::Io(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(name = "rankwave", version, about = "Wave operators of finite-rank perturbations of the Laplacian")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Free resolvent kernel along a radial grid.
    Resolvent(RunArgs),
    /// F^±, det A^+ and the spectral condition along a λ grid.
    SpectralScan(RunArgs),
    /// Low-energy expansion coefficients of the scalar channel.
    ExpansionFit(RunArgs),
    /// W₋f (or its low/high-energy piece) on a sampled field.
    WaveApply(RunArgs),
    /// Hilbert-piece sweep over f_R = 1_{2<|y|<R}.
    Dichotomy(RunArgs),
    /// Stationary W₋f against the time-domain limit on a periodic box.
    OracleCompare(RunArgs),
    /// Pass/fail table over the manifests in an artifact directory.
    Report(ReportArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ReportArgs {
    /// Artifact directory to scan; report.json and report.md are written there.
    #[arg(long)]
    out: PathBuf,
}

fn resolve(name: &str, args: &RunArgs) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(c) = &cfg.command {
        if c != name {
            return Err(Failure::Usage(format!("config is for `{c}`, not `{name}`")));
        }
    }
    cfg.command = Some(name.to_string());
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if args.workers.is_some() {
        cfg.workers = args.workers;
    }
    Ok(cfg)
}

fn set_workers(n: Option<usize>) -> Result<(), Failure> {
    if let Some(n) = n {
        if n == 0 {
            return Err(Failure::Usage("--workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Io(format!("worker pool: {e}")))?;
    }
    Ok(())
}

type Runner = fn(&RunConfig, &Path, &mut Run) -> Result<(), Failure>;

fn execute(name: &str, args: &RunArgs, runner: Runner) -> Result<(), Failure> {
    let cfg = resolve(name, args)?;
    set_workers(cfg.workers)?;
    let base = args.config.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut run = Run::create(&args.out)?;
    let result = runner(&cfg, &base, &mut run);
    let (status, error) = match &result {
        Ok(()) => ("ok", None),
        Err(Failure::Usage(m)) => ("rejected", Some(m.as_str())),
        Err(Failure::Numeric(m)) => ("numeric-failure", Some(m.as_str())),
        Err(Failure::Io(m)) => ("io-failure", Some(m.as_str())),
    };
    run.finish(name, &cfg, status, error)?;
    result
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Resolvent(a) => execute("resolvent", a, |c, _, r| commands::resolvent(c, r)),
        Command::SpectralScan(a) => execute("spectral-scan", a, commands::spectral_scan),
        Command::ExpansionFit(a) => execute("expansion-fit", a, commands::expansion_fit),
        Command::WaveApply(a) => execute("wave-apply", a, commands::wave_apply),
        Command::Dichotomy(a) => execute("dichotomy", a, commands::dichotomy),
        Command::OracleCompare(a) => execute("oracle-compare", a, commands::oracle_compare),
        Command::Report(a) => report::report(&a.out).map(|n| eprintln!("report over {n} runs written to {}", a.out.display())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("rankwave: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
