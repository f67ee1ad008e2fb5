mod error;
mod gaps;
mod io;
mod metastable;
mod model;
mod reproduce;
mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use mhrev::reversiblize::{additive_reversiblization, mh_first, mh_second, multiplicative_reversiblization};
use mhrev::stationary_distribution;

use error::{CliError, Result};
use io::{KernelFile, Kind};
use model::Source;
use reproduce::Target;

#[derive(Debug, Parser)]
#[command(name = "mhrev", version, about = "Spectral analysis of non-reversible Markov chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    M1,
    M2,
    Additive,
    Mult,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Scan k = 1..n_max for the MH and pseudo-spectral gaps.
    Gaps {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 100)]
        n_max: usize,
        /// Strictness margin for membership in C.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the per-k curves as an SVG plot.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Write M1, M2, the additive or the multiplicative reversiblization.
    Reversiblize {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum)]
        which: Which,
        /// Power for the multiplicative reversiblization P*^k P^k.
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Metastability, leakage and conductance of a partition.
    Metastable {
        #[command(flatten)]
        source: Source,
        /// Blocks separated by ';', states by ',' (e.g. "1,2;3,4").
        #[arg(long)]
        partition: String,
        /// Number of sets in the k-way expansion.
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Time for the leakage of the first block.
        #[arg(long, default_value_t = 1)]
        t: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute reference values and compare them with their tolerances.
    Reproduce {
        #[arg(value_enum, required = true)]
        targets: Vec<Target>,
        #[arg(long, default_value = "reproduce-out")]
        outdir: PathBuf,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => Ok(fs::write(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("MHREV_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Parse(format!("MHREV_THREADS={raw:?} is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Parse(e.to_string()))
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Gaps { source, n_max, tol, format, out, svg } => {
            let chain = source.chain()?;
            let report = gaps::run(&chain, n_max, tol)?;
            info!("gamma_MH = {}, gamma_ps = {}", report.gamma_mh, report.gamma_ps);
            if let Some(path) = svg {
                fs::write(path, report.to_svg("MH and pseudo-spectral curves"))?;
            }
            let text = match format {
                Format::Json => report.to_json(),
                Format::Csv => report.to_csv(),
            };
            emit(out.as_deref(), &text)
        }
        Command::Reversiblize { source, which, k, format, out } => {
            let file = source.file()?;
            let p = file.stochastic()?;
            let pi = stationary_distribution(&p)?;
            let (matrix, kind) = match which {
                Which::M1 => (mh_first(&p, &pi)?.matrix().clone(), Kind::Stochastic),
                Which::M2 => (mh_second(&p, &pi)?.matrix().clone(), Kind::Signed),
                Which::Additive => (additive_reversiblization(&p, &pi)?.matrix().clone(), Kind::Stochastic),
                Which::Mult => (multiplicative_reversiblization(&p, &pi, k)?.matrix().clone(), Kind::Stochastic),
            };
            let result = KernelFile::new(&matrix, kind, file.states);
            let text = match format {
                Format::Json => result.to_json(),
                Format::Csv => result.to_csv(),
            };
            emit(out.as_deref(), &text)
        }
        Command::Metastable { source, partition, k, t, format, out } => {
            let chain = source.chain()?;
            let report = metastable::run(&chain, &partition, k, t)?;
            let text = match format {
                Format::Json => report.to_json(),
                Format::Csv => report.to_csv(),
            };
            emit(out.as_deref(), &text)
        }
        Command::Reproduce { targets, outdir } => {
            let mut failed = 0;
            for target in targets {
                let outcome = reproduce::run(target)?;
                reproduce::write(&outdir, target, &outcome)?;
                let failures = outcome.failures();
                println!(
                    "{} {}",
                    if failures.is_empty() { "PASS" } else { "FAIL" },
                    target.name()
                );
                print!("{}", outcome.table_text());
                for c in &failures {
                    eprintln!(
                        "{}: {}: expected {} (tol {}), computed {}",
                        target.name(),
                        c.name,
                        c.expected,
                        c.tolerance,
                        c.computed
                    );
                }
                failed += failures.len();
            }
            if failed > 0 {
                return Err(CliError::Mismatch(failed));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
