//! `lepage`: sample LePage series on convex cones, verify their stability
//! properties and compute polar decompositions.

mod codec;
mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Overrides, RunConfig};
use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "lepage", version, about = "LePage series on convex cones")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// euclidean-sum, operator, max-grid, time-stable or atomic-measure.
    #[arg(long, global = true)]
    cone: Option<String>,
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Comma-separated time grid.
    #[arg(long, global = true)]
    grid: Option<String>,
    /// Rows separated by ';', entries by ',', e.g. "1,0;0,2".
    #[arg(long, global = true, allow_hyphen_values = true)]
    matrix: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Truncation level of the series.
    #[arg(long, global = true)]
    r: Option<f64>,
    /// Number of realizations.
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true, env = "LEPAGE_SEED")]
    seed: Option<u64>,
    /// Probe characters separated by ';'.
    #[arg(long, global = true)]
    probes: Option<String>,
    /// Output directory.
    #[arg(long, global = true, env = "LEPAGE_OUT")]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write realizations of the truncated series to samples.csv.
    Sample {
        #[command(flatten)]
        common: Common,
    },
    /// Run verification suites and write reports.
    Verify {
        #[command(flatten)]
        common: Common,
        /// stability, phi, cms, homogeneity, eps or all.
        #[arg(long)]
        suite: Option<String>,
        #[arg(long, hide = true)]
        mutate: bool,
    },
    /// Polar decomposition of the elements in a CSV file.
    Decompose {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: Option<PathBuf>,
        /// Read (angular, radial) rows and write the composed elements.
        #[arg(long)]
        compose: bool,
    },
}

fn overrides(c: &Common) -> Overrides {
    Overrides {
        cone: c.cone.clone(),
        dim: c.dim,
        grid: c.grid.clone(),
        matrix: c.matrix.clone(),
        alpha: c.alpha,
        r: c.r,
        n: c.n,
        seed: c.seed,
        probes: c.probes.clone(),
        out: c.out.clone(),
        ..Overrides::default()
    }
}

fn resolve(common: &Common, extra: Overrides, command: &str) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let o = Overrides { suite: extra.suite, mutate: extra.mutate, input: extra.input, compose: extra.compose, ..overrides(common) };
    cfg.apply(&o, command)?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sample { common } => {
            let cfg = resolve(&common, Overrides::default(), "sample")?;
            let path = commands::sample(&cfg)?;
            println!("wrote {} realizations to {}", cfg.lepage.n, path.display());
        }
        Command::Verify { common, suite, mutate } => {
            let cfg = resolve(&common, Overrides { suite, mutate, ..Overrides::default() }, "verify")?;
            let failed = commands::verify(&cfg)?;
            if !failed.is_empty() {
                return Err(CliError::Verification(failed.join(", ")));
            }
            println!("all tests passed; reports in {}", cfg.out.display());
        }
        Command::Decompose { common, input, compose } => {
            let cfg = resolve(&common, Overrides { input, compose, ..Overrides::default() }, "decompose")?;
            let s = commands::decompose_file(&cfg)?;
            println!("processed {} rows, rejected {}", s.written, s.rejected);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lepage: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
