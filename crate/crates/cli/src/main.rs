use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coexist_cli::{emit_plotdata, CliError, Estimator, ExperimentKind, ExperimentSpec};
use coexist_core::load_config;

#[derive(Parser)]
#[command(name = "coexist", version, about = "Power allocation for radar and communication spectrum sharing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Allocate powers for the configured scenario.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// CSI source: truth, grid or curvefit.
        #[arg(long, default_value = "grid")]
        estimator: Estimator,
        /// Overrides `run.seed`.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run one experiment design and write `<out>/<experiment>.csv`.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        experiment: ExperimentKind,
        #[arg(long, default_value = "grid")]
        estimator: Estimator,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Worker threads (all cores by default).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Check the invariant suite on a scenario file.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Pivot a results file into x,series,y triples.
    Plotdata {
        results: PathBuf,
        /// Defaults to `<results stem>_plot.csv` next to the input.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve { config, estimator, seed, out } => {
            let cfg = load_config(config)?;
            let seed = seed.unwrap_or(cfg.run.seed);
            let result = coexist_cli::solve(&cfg, estimator, seed)?;
            coexist_cli::write_solve(&out, &result)?;
            let s = &result.summary;
            println!(
                "estimator {estimator}: gamma {:.4e}, min SINR {:.2} dB, P_D {:.4}, rate {:.4} (MC {:.4}), {} iterations",
                s.gamma, s.min_sinr_db, s.pd, s.rate_ap, s.rate_mc, s.iters
            );
        }
        Command::Sweep { config, experiment, estimator, seed, out, jobs } => {
            let mut cfg = load_config(config)?;
            if let Some(seed) = seed {
                cfg.run.seed = seed;
            }
            let spec = ExperimentSpec::from_config(experiment, &cfg, estimator, &out);
            let path = coexist_cli::run(&spec, &cfg, jobs)?;
            println!("wrote {}", path.display());
        }
        Command::Validate { config } => {
            let cfg = load_config(config)?;
            let checks = coexist_cli::validate(&cfg)?;
            for c in &checks {
                println!("{}  {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                return Err(CliError::Validation(failed));
            }
        }
        Command::Plotdata { results, out } => {
            let out = out.unwrap_or_else(|| {
                let stem = results.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
                results.with_file_name(format!("{stem}_plot.csv"))
            });
            let n = emit_plotdata(&results, &out)?;
            println!("wrote {n} points to {}", out.display());
        }
    }
    Ok(())
}
