use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod manifest;

/// Exit statuses.
pub const EXIT_OK: u8 = 0;
pub const EXIT_INVARIANT: u8 = 2;
pub const EXIT_CONFIG: u8 = 3;
pub const EXIT_BLOWUP: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "mg-spectral", version, about = "Pseudo-spectral experiments for the magneto-geostrophic active scalar")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Output directory (default: $MG_SPECTRAL_OUT, else ./mg-spectral-out).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Override the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Parallel jobs for preset batches.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// TOML configuration file.
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Built-in preset; repeat or use a comma-separated list for a batch.
    #[arg(long, value_delimiter = ',')]
    pub preset: Vec<String>,
}

#[derive(Args, Debug, Clone)]
pub struct SymbolArgs {
    /// Tabulate the symbols over |k_i| <= N.
    #[arg(long)]
    pub n: Option<usize>,
    /// Asymptotic probe exponent, e.g. `r=0.5`.
    #[arg(long)]
    pub probe: Option<String>,
    /// k1 sweep range `lo:hi` for the probe.
    #[arg(long, default_value = "64:4096")]
    pub k1: String,
    /// Sweep points.
    #[arg(long, default_value_t = 25)]
    pub points: usize,
    /// Line direction `p1,p2,p3` (rationals allowed).
    #[arg(long, allow_hyphen_values = true)]
    pub line: Option<String>,
    /// Cone aperture C (rational allowed).
    #[arg(long)]
    pub cone: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct ReportArgs {
    /// Diagnostics CSV or a run directory containing diagnostics.csv.
    #[arg(long)]
    pub input: PathBuf,
    /// Reference decay rate for the fits.
    #[arg(long, allow_hyphen_values = true)]
    pub reference_rate: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Symbol tables, asymptotic probes, line constants and cone bounds.
    Symbols {
        #[command(flatten)]
        args: SymbolArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Evolve line-supported data on the line.
    LineRun {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Evolve data on a cube truncation.
    FullRun {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Picard iteration with contraction ratios.
    Picard {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Re-analyze a diagnostics CSV.
    Report {
        #[command(flatten)]
        args: ReportArgs,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let code = match cli.command {
        Command::Symbols { args, common } => commands::symbols(&args, &common),
        Command::LineRun { run, common } => commands::simulate(commands::Mode::Line, &run, &common),
        Command::FullRun { run, common } => commands::simulate(commands::Mode::Full, &run, &common),
        Command::Picard { run, common } => commands::picard(&run, &common),
        Command::Report { args, common } => commands::report(&args, &common),
    };
    ExitCode::from(code)
}
