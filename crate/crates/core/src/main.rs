use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rareae::commands;
use rareae::config::ExperimentConfig;
use rareae::Error;

#[derive(Parser)]
#[command(name = "rareae", version, about = "Rare-aware autoencoder experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Seed(s); overrides `train.seeds`. Repeatable.
    #[arg(long = "seed")]
    seeds: Vec<u64>,
    /// Output directory; overrides `train.out_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Write the simulated dataset as numbered frames plus a manifest.
    Generate(Common),
    /// Train one model per seed.
    Train(Common),
    /// Evaluate a checkpoint and write metric reports.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long, required_unless_present = "identity")]
        checkpoint: Option<PathBuf>,
        /// Score the ground truth against itself instead of a model.
        #[arg(long)]
        identity: bool,
    },
    /// Compare report directories written by `evaluate`.
    Compare {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn load(common: &Common) -> Result<(ExperimentConfig, Vec<u64>, PathBuf), Error> {
    let cfg = ExperimentConfig::load(&common.config)?;
    let seeds = if common.seeds.is_empty() {
        cfg.train.seeds.clone()
    } else {
        common.seeds.clone()
    };
    let out = common
        .out
        .clone()
        .unwrap_or_else(|| cfg.train.out_dir.clone());
    Ok((cfg, seeds, out))
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Generate(common) => {
            let (cfg, seeds, out) = load(&common)?;
            let n = commands::generate(&cfg, &out, seeds[0])?;
            if !common.quiet {
                println!("wrote {n} frames to {}", out.display());
            }
        }
        Command::Train(common) => {
            let (cfg, seeds, out) = load(&common)?;
            for dir in commands::train_runs(&cfg, &out, &seeds, common.quiet)? {
                if !common.quiet {
                    println!("{}", dir.display());
                }
            }
        }
        Command::Evaluate {
            common,
            checkpoint,
            identity,
        } => {
            let (cfg, seeds, out) = load(&common)?;
            let report = if identity {
                cfg.validate()?;
                let data = commands::load_dataset(&cfg, seeds[0])?;
                commands::write_evaluation(&cfg, &data, data.frames(), &out)?
            } else {
                let ckpt = checkpoint.expect("clap enforces --checkpoint");
                commands::evaluate(&cfg, &ckpt, &out, seeds[0])?
            };
            if !common.quiet {
                for (name, agg) in report.aggregates() {
                    println!("{name}: {:.6} ± {:.6}", agg.mean, agg.std);
                }
            }
        }
        Command::Compare { reports, out } => {
            print!("{}", commands::compare(&reports, Path::new(&out))?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Validation(_) | Error::Config(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
