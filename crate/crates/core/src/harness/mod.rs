//! Seeded Monte-Carlo sweeps over bit depths and feedback schemes.
//!
//! Trial `i` uses seed `base ^ mix64(i)`; the channel, the predictor
//! initialization and the mini-batch order each draw from their own derived
//! stream, so a trial's results do not depend on which other trials, bit
//! depths or schemes are run alongside it.

mod config;
mod export;

pub use config::ExperimentConfig;
pub use export::{bar_chart_svg, export, write_results_csv, ExportPaths, RESULTS_HEADER};

use crate::channel::{generate_sequence, ArModel};
use crate::error::{Error, Result};
use crate::metrics::{aggregate, precoding_snr, AggregateResult, RunResult};
use crate::predictor::TrainingReport;
use crate::protocol::{run_conventional, run_operational, warm_up, LinkTrace, Scheme};
use crate::rng::{derive, trial_seed};

const CHANNEL_STREAM: u64 = 0;
const PREDICTOR_STREAM: u64 = 1;

/// Training outcome of one trial's shared predictor.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialTraining {
    pub trial: usize,
    pub report: TrainingReport,
    /// The persistence predictor replaced the trained network.
    pub fallback: bool,
    pub residual_range: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResults {
    /// Per-trial results in (trial, bits, scheme) order.
    pub runs: Vec<RunResult>,
    pub aggregates: Vec<AggregateResult>,
    pub training: Vec<TrialTraining>,
}

struct TrialOutput {
    runs: Vec<RunResult>,
    training: Option<TrialTraining>,
}

/// Runs every trial and aggregates per (bits, scheme).
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResults> {
    run_experiment_with(cfg, |_, _| {})
}

/// Like [`run_experiment`], handing every produced trace to `inspect` as
/// `(trial, trace)`.
pub fn run_experiment_with<F>(cfg: &ExperimentConfig, inspect: F) -> Result<ExperimentResults>
where
    F: Fn(usize, &LinkTrace) + Sync,
{
    cfg.validate()?;
    let outputs = map_trials(cfg.trials, |trial| run_trial(cfg, trial, &inspect))?;
    let mut runs = Vec::new();
    let mut training = Vec::new();
    for out in outputs {
        runs.extend(out.runs);
        training.extend(out.training);
    }
    let aggregates = aggregate(&runs);
    Ok(ExperimentResults {
        runs,
        aggregates,
        training,
    })
}

#[cfg(feature = "parallel")]
fn map_trials<T: Send>(trials: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    use rayon::prelude::*;
    (0..trials).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_trials<T: Send>(trials: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..trials).map(f).collect()
}

fn run_trial<F>(cfg: &ExperimentConfig, trial: usize, inspect: &F) -> Result<TrialOutput>
where
    F: Fn(usize, &LinkTrace) + Sync,
{
    let seed = trial_seed(cfg.base_seed, trial as u64);
    let ctx = |e: Error| e.context(format!("trial {trial}"));
    let model = ArModel::jakes(cfg.ar_order, cfg.fm, cfg.rows, cfg.cols).map_err(ctx)?;
    let channel = generate_sequence(&model, cfg.total_slots(), derive(seed, CHANNEL_STREAM)).map_err(ctx)?;
    let operational = &channel[cfg.link.warmup_slots..];

    let mut link_cfg = cfg.link.clone();
    link_cfg.rnn.seed = derive(seed, PREDICTOR_STREAM);
    let shared = if cfg.schemes.contains(&Scheme::Proposed) {
        let link = warm_up(&channel, &link_cfg).map_err(ctx)?;
        let model = link.train().map_err(ctx)?;
        Some((link, model))
    } else {
        None
    };

    let mut runs = Vec::with_capacity(cfg.bits.len() * cfg.schemes.len());
    for &bits in &cfg.bits {
        for &scheme in &cfg.schemes {
            let ctx = |e: Error| e.context(format!("trial {trial}, bits {bits}, scheme {scheme}"));
            let trace = match (scheme, &shared) {
                (Scheme::Conventional, _) => run_conventional(operational, &link_cfg, bits),
                (Scheme::Proposed, Some((link, model))) => run_operational(link.clone(), model, operational, bits),
                (Scheme::Proposed, None) => unreachable!("proposed runs always train a shared model"),
            }
            .map_err(ctx)?;
            precoding_snr(&trace, cfg.noise_power).map_err(ctx)?;
            inspect(trial, &trace);
            runs.push(RunResult::from_trace(&trace, trial, seed).map_err(ctx)?);
        }
    }
    let training = shared.map(|(_, model)| TrialTraining {
        trial,
        fallback: model.uses_fallback(),
        residual_range: model.residual_range(&link_cfg),
        report: model.report,
    });
    Ok(TrialOutput { runs, training })
}
