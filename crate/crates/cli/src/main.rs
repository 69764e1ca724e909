use std::error::Error as _;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use csi_twin::channel::{generate_sequence, write_sequence_csv, ArModel};
use csi_twin::harness::{export, run_experiment, ExperimentConfig};
use csi_twin::{Error, Resolution};

/// Twin-predictor residual CSI feedback simulator.
#[derive(Parser)]
#[command(name = "csi-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo sweep and write results.csv (plus charts with --plot).
    Run {
        /// Experiment file of `section.key = value` lines.
        #[arg(long)]
        config: PathBuf,
        /// Bit depths to sweep, e.g. `1,2,3` or `lossless`.
        #[arg(long, value_delimiter = ',')]
        bits: Option<Vec<String>>,
        #[arg(long)]
        trials: Option<usize>,
        /// Base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write mse.svg and snr.svg.
        #[arg(long)]
        plot: bool,
    },
    /// Dump a Jakes-correlated channel sequence as CSV on stdout.
    InspectChannel {
        /// Normalized maximum Doppler f_m.
        #[arg(long)]
        fm: f64,
        #[arg(long)]
        slots: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// AR order u.
        #[arg(long, default_value_t = 1)]
        order: usize,
        #[arg(long, default_value_t = 1)]
        rows: usize,
        #[arg(long, default_value_t = 2)]
        cols: usize,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let mut msg = format!("error: {e}");
            let mut source = e.source();
            while let Some(s) = source {
                let cause = s.to_string();
                if !msg.contains(&cause) {
                    msg.push_str(&format!("\n  caused by: {cause}"));
                }
                source = s.source();
            }
            eprintln!("{msg}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run {
            config,
            bits,
            trials,
            seed,
            out,
            plot,
        } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(bits) = bits {
                cfg.bits = bits.iter().map(|b| b.parse::<Resolution>()).collect::<Result<_, _>>()?;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(s) = seed {
                cfg.base_seed = s;
            }
            if let Some(o) = out {
                cfg.output_dir = o;
            }
            cfg.plot |= plot;
            cfg.validate()?;
            let results = run_experiment(&cfg)?;
            let paths = export(&results.aggregates, &cfg.output_dir, cfg.plot)?;
            println!("{:<13} {:>8} {:>12} {:>12} {:>10}", "scheme", "bits", "mse", "snr_db", "bits/slot");
            for r in &results.aggregates {
                println!(
                    "{:<13} {:>8} {:>12.4e} {:>12.4} {:>10.3}",
                    r.scheme.to_string(),
                    r.resolution.to_string(),
                    r.mse_mean,
                    r.snr_db_mean,
                    r.bits_per_slot_mean
                );
            }
            let fallbacks = results.training.iter().filter(|t| t.fallback).count();
            if !results.training.is_empty() {
                println!("persistence fallback in {fallbacks} of {} trials", results.training.len());
            }
            println!("wrote {}", paths.csv.display());
            for p in [paths.mse_chart, paths.snr_chart].into_iter().flatten() {
                println!("wrote {}", p.display());
            }
            Ok(())
        }
        Command::InspectChannel {
            fm,
            slots,
            seed,
            order,
            rows,
            cols,
        } => {
            let model = ArModel::jakes(order, fm, rows, cols)?;
            let seq = generate_sequence(&model, slots, seed)?;
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            match write_sequence_csv(&seq, &mut lock).and_then(|_| lock.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source: e,
                }),
                _ => Ok(()),
            }
        }
    }
}
