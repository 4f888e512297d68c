//! Experiment runner binary: parse a config, run the requested harness,
//! write byte-stable report files, and exit per the status contract
//! (0 all-pass, 1 config/file errors, 2 certified failure or
//! contradiction, 3 inconclusive-only).

use clap::Parser;
use cocycle::config::ExperimentConfig;
use cocycle::error::Error;
use cocycle::runner::run_experiment;
use std::path::{Path, PathBuf};

/// Driven Markov-cocycle experiments: invariant-density audits,
/// product-space consistency checks, discretization cross-checks,
/// averaged-iterate identities, and map-family distortion certificates.
#[derive(Parser)]
#[command(name = "cocycle", version, about, long_about = None)]
struct Cli {
    /// Experiment configuration file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,

    /// Output directory for report files (overrides the config's `out`).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Master RNG seed (overrides the config's `seed`).
    #[arg(long, value_name = "N")]
    seed: Option<u64>,

    /// Worker threads for fiber-parallel audits (default: all cores).
    #[arg(long, value_name = "K")]
    jobs: Option<usize>,

    /// List every artifact file as it is written.
    #[arg(long, short)]
    verbose: bool,
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(run(cli));
}

fn run(cli: Cli) -> i32 {
    if let Some(jobs) = cli.jobs {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
        if let Err(e) = pool {
            eprintln!("warning: could not configure {jobs} worker thread(s): {e}");
        }
    }

    let mut cfg = match ExperimentConfig::from_file(&cli.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            print_error(&cli.config, &e);
            return 1;
        }
    };
    if let Some(out) = cli.out {
        cfg.out = Some(out);
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }

    match run_experiment(&cfg) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            if cli.verbose {
                for file in &outcome.files {
                    println!("wrote {}", file.display());
                }
            } else {
                println!("wrote {} file(s)", outcome.files.len());
            }
            outcome.status.code()
        }
        Err(e) => {
            print_error(&cli.config, &e);
            1
        }
    }
}

/// Config errors carry line/column coordinates; input-file errors carry a
/// line. Everything else prints its own message.
fn print_error(config_path: &Path, e: &Error) {
    match e {
        Error::Config { line, col, msg } => {
            eprintln!("{}:{line}:{col}: error: {msg}", config_path.display());
        }
        Error::FileFormat { line, msg } => {
            eprintln!("error: input line {line}: {msg}");
        }
        other => eprintln!("error: {other}"),
    }
}
