//! Command-line front end: `generate` synthetic data, `assess` a linking
//! method, or `compare` two method variants on the same simulated samples.
//!
//! Exit codes: 0 ok, 1 configuration / input error, 2 infeasible marginals
//! or estimation failure, 3 I/O failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use macsim::config::RunConfig;
use macsim::datamodel::MatrixMode;
use macsim::pipeline;
use macsim::Error;

#[derive(Parser)]
#[command(name = "macsim", version, about = "Assess record-linkage accuracy by agreement-matrix simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// TOML run configuration.
    #[arg(long, value_name = "FILE")]
    config: PathBuf,

    /// Override the master seed (chain seed; generator seed for `generate`).
    #[arg(long)]
    seed: Option<u64>,

    /// Override the output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct RunOpts {
    /// Agreement coding: `original` (exact match) or `extended` (similarity).
    #[arg(long)]
    mode: Option<String>,

    /// Override the linking cutoff.
    #[arg(long)]
    cutoff: Option<f64>,

    /// Override the number of retained samples (S).
    #[arg(long)]
    samples: Option<usize>,

    /// Override the thinning interval (d).
    #[arg(long)]
    thinning: Option<usize>,

    /// Override the blocking variables (comma-separated names).
    #[arg(long, value_name = "VARS")]
    blocking: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the synthetic X.csv, Y.csv and alignment.csv.
    Generate {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run the full assessment and write the report CSVs.
    Assess {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        run: RunOpts,
    },
    /// Assess two configured variants on the same simulated samples.
    Compare {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        run: RunOpts,
    },
}

fn parse_mode(s: &str) -> Result<MatrixMode, Error> {
    match s {
        "original" => Ok(MatrixMode::Original),
        "extended" => Ok(MatrixMode::Extended),
        other => Err(Error::Config(format!(
            "mode must be original or extended, got {other}"
        ))),
    }
}

fn load_config(common: &CommonOpts, run: Option<&RunOpts>, seed_to_run: bool) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::from_path(&common.config)?;
    if let Some(seed) = common.seed {
        if seed_to_run {
            cfg.run.seed = seed;
        } else if let Some(gen) = cfg.synthgen.as_mut() {
            gen.seed = seed;
        } else {
            return Err(Error::Config(
                "--seed for generate needs a [synthgen] section".into(),
            ));
        }
    }
    if let Some(out) = &common.out {
        cfg.run.out_dir = out.clone();
    }
    if let Some(run_opts) = run {
        if let Some(mode) = &run_opts.mode {
            cfg.run.mode = parse_mode(mode)?;
        }
        if let Some(cutoff) = run_opts.cutoff {
            cfg.run.cutoff = cutoff;
        }
        if let Some(samples) = run_opts.samples {
            cfg.run.samples = samples;
        }
        if let Some(thinning) = run_opts.thinning {
            cfg.run.thinning = thinning;
        }
        if let Some(blocking) = &run_opts.blocking {
            cfg.run.blocking = Some(
                blocking
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect(),
            );
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Generate { common } => {
            let cfg = load_config(&common, None, false)?;
            let out = pipeline::run_generate(&cfg)?;
            println!(
                "generated {} X records and {} Y records",
                out.n_x, out.n_y
            );
            println!("wrote {}", out.x_path.display());
            println!("wrote {}", out.y_path.display());
            println!("wrote {}", out.alignment_path.display());
        }
        Command::Assess { common, run } => {
            let cfg = load_config(&common, Some(&run), true)?;
            let out = pipeline::run_assess(&cfg)?;
            println!(
                "assessed {} blocks ({} skipped, {} excluded), {} X records",
                out.assessed_blocks, out.skipped_blocks, out.excluded_blocks, out.total_records
            );
            println!("grand mean correct re-link proportion: {}", out.grand_mean);
            println!("reports in {}", out.out_dir.display());
        }
        Command::Compare { common, run } => {
            let cfg = load_config(&common, Some(&run), true)?;
            let out = pipeline::run_compare(&cfg)?;
            println!(
                "compared {} vs {} over {} blocks",
                out.variant_names[0], out.variant_names[1], out.assessed_blocks
            );
            println!(
                "grand means: {} = {}, {} = {}, delta = {}",
                out.variant_names[0],
                out.grand_means[0],
                out.variant_names[1],
                out.grand_means[1],
                out.delta
            );
            println!("reports in {}", out.out_dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.class().exit_code() as u8)
        }
    }
}
