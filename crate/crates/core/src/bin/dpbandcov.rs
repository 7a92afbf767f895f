use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use dpbandcov::estimators::NormKind;
use dpbandcov::harness::{fmt_f64, run_experiment, write_outputs, ExperimentConfig};
use dpbandcov::theory::{minimax_rate_terms, naive_rate, RateSpec};

#[derive(Parser)]
#[command(name = "dpbandcov", version, about = "Private estimation of bandable covariance matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    Operator,
    Frobenius,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its CSV files.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; 1 runs serially. Defaults to all cores.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check a config file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the minimax rate terms and the unstructured comparator.
    Rates {
        #[arg(long, value_enum, default_value = "operator")]
        norm: NormArg,
        #[arg(long)]
        n: f64,
        #[arg(long)]
        d: f64,
        /// Privacy budget; `inf` for the non-private rate.
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        alpha: f64,
    },
}

fn run(cli: Cli) -> dpbandcov::Result<()> {
    match cli.command {
        Command::Run {
            config,
            seed,
            out,
            threads,
        } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if threads == Some(0) {
                return Err(dpbandcov::Error::Argument("--threads must be at least 1".into()));
            }
            let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
            let output = run_experiment(&cfg, threads)?;
            for p in write_outputs(&output, &dir)? {
                println!("{}", p.display());
            }
            for s in &output.slopes {
                eprintln!(
                    "{} alpha={}: slope_op={:.4} (rate {:.4}), slope_frob={:.4}",
                    s.estimator.as_str(),
                    s.alpha.map(fmt_f64).unwrap_or_else(|| "na".into()),
                    s.slope_op,
                    s.rate_slope,
                    s.slope_frob
                );
            }
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            println!(
                "ok: {} with {} estimator(s), {} replicate(s)",
                cfg.experiment.as_str(),
                cfg.estimators.len(),
                cfg.replicates
            );
        }
        Command::Rates { norm, n, d, rho, alpha } => {
            let norm = match norm {
                NormArg::Operator => NormKind::Operator,
                NormArg::Frobenius => NormKind::Frobenius,
            };
            let t = minimax_rate_terms(&RateSpec { norm, n, d, rho, alpha })?;
            println!("statistical {}", fmt_f64(t.statistical));
            println!("privacy {}", fmt_f64(t.privacy));
            println!("total {}", fmt_f64(t.total()));
            println!("naive {}", fmt_f64(naive_rate(n, d, rho)?));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
