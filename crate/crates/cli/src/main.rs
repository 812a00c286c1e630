use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use schottky_zeta_cli::{cmd_pairing, cmd_products, cmd_tate, cmd_validate, pretty, CliError, RunOptions, TateSeries};

#[derive(Parser)]
#[command(name = "schottky-zeta", version, about = "Schottky groups, zeta products and Tate-curve series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads; 1 gives reproducible runs.
    #[arg(long, global = true, env = "SCHOTTKY_ZETA_THREADS", default_value_t = 1)]
    threads: usize,
    /// Aligned text tables instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpecArgs {
    /// Group spec (JSON).
    #[arg(long)]
    spec: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Build the group and check circles, loxodromicity and delta.
    Validate {
        #[command(flatten)]
        spec: SpecArgs,
        /// Word length for the delta estimate.
        #[arg(long, default_value_t = 5)]
        max_word_len: usize,
    },
    /// Zograf and McIntyre-Takhtajan products, Mumford ratio, Ruelle values.
    Products {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 10)]
        max_word_len: usize,
        /// Identity and convergence tolerance.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Weights, comma separated (default 2,3 for genus >= 2).
        #[arg(long, value_delimiter = ',')]
        k: Option<Vec<u32>>,
    },
    /// Normalization matrix, k = 2 pairing, basis change and periods.
    Pairing {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 8)]
        max_word_len: usize,
        /// Quadrature tolerance.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Fit the determinant exponent over multipliers scaled by 1e-2..1e-4.
        #[arg(long)]
        scan: bool,
    },
    /// Exact q-series of the Tate curve.
    Tate {
        /// Truncation order N (coefficients of q^0..q^N).
        #[arg(long, short = 'n')]
        order: usize,
        #[arg(long, value_enum)]
        which: TateSeries,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads;
    let opts = |max_word_len, tol| RunOptions {
        max_word_len,
        tol,
        threads,
    };
    let report = match &cli.command {
        Command::Validate { spec, max_word_len } => cmd_validate(&spec.spec, &opts(*max_word_len, 0.0)),
        Command::Products {
            spec,
            max_word_len,
            tol,
            k,
        } => cmd_products(&spec.spec, k.as_deref(), &opts(*max_word_len, *tol)),
        Command::Pairing {
            spec,
            max_word_len,
            tol,
            scan,
        } => cmd_pairing(&spec.spec, *scan, &opts(*max_word_len, *tol)),
        Command::Tate { order, which } => cmd_tate(*order, *which, threads),
    };
    let text = if cli.pretty {
        pretty::render(&report)
    } else {
        report.to_json() + "\n"
    };
    match &cli.out {
        Some(path) => {
            if let Err(source) = std::fs::write(path, &text) {
                let e = CliError::Write {
                    path: path.clone(),
                    source,
                };
                eprintln!("error: {e}");
                return ExitCode::from(e.exit_code() as u8);
            }
        }
        None => print!("{text}"),
    }
    if let Some(e) = &report.error {
        eprintln!("error: {e}");
    }
    ExitCode::from(report.exit_code() as u8)
}
