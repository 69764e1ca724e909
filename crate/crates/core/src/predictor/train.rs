use rand::seq::SliceRandom;

use super::network::{Gradient, RnnWeights, Scratch};
use super::state::Predictor;
use super::RnnConfig;
use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::rng::{derive, seeded};

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPSILON: f64 = 1e-8;

/// Outcome of training one real-valued network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkReport {
    pub epochs_run: usize,
    /// Epoch whose weights were kept (1-based).
    pub best_epoch: usize,
    /// Teacher-forced training loss in the kept epoch.
    pub train_loss: f64,
    /// Free-running `η_mse` on the validation split.
    pub validation_eta: f64,
    /// Free-running `η_mse` on the test split.
    pub test_eta: f64,
    /// Test-split `η_mse` with teacher-forced feedback.
    pub teacher_forced_test_eta: f64,
    pub hold_validation_eta: f64,
    pub hold_test_eta: f64,
}

impl NetworkReport {
    pub fn beats_hold(&self) -> bool {
        self.test_eta < self.hold_test_eta
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingReport {
    pub real: NetworkReport,
    pub imag: NetworkReport,
    pub train_samples: usize,
    pub validation_samples: usize,
    pub test_samples: usize,
}

impl TrainingReport {
    /// Complex-valued validation `η_mse` (real plus imaginary network).
    pub fn validation_eta(&self) -> f64 {
        self.real.validation_eta + self.imag.validation_eta
    }

    pub fn hold_validation_eta(&self) -> f64 {
        self.real.hold_validation_eta + self.imag.hold_validation_eta
    }

    pub fn test_eta(&self) -> f64 {
        self.real.test_eta + self.imag.test_eta
    }

    pub fn hold_test_eta(&self) -> f64 {
        self.real.hold_test_eta + self.imag.hold_test_eta
    }

    /// Both networks beat persistence on the test split.
    pub fn beats_hold(&self) -> bool {
        self.real.beats_hold() && self.imag.beats_hold()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedPredictor {
    pub real: RnnWeights,
    pub imag: RnnWeights,
    pub report: TrainingReport,
}

impl TrainedPredictor {
    pub fn predictor(&self) -> Predictor {
        Predictor::Recurrent {
            real: self.real.clone(),
            imag: self.imag.clone(),
        }
    }
}

/// Teacher-forced samples for one real-valued part of the history.
struct Dataset {
    inputs: usize,
    outputs: usize,
    /// `n × M`, feedback slot holds the teacher value `ĥ(t)`.
    x: Vec<f64>,
    /// `n × d`, target `ĥ(t+K)`.
    y: Vec<f64>,
    train: usize,
    validation: usize,
}

impl Dataset {
    fn build(series: &[f64], d: usize, cfg: &RnnConfig, train: usize, validation: usize) -> Self {
        let (k, horizon) = (cfg.delay_taps, cfg.horizon);
        let steps = series.len() / d;
        let n = steps - k - horizon;
        let inputs = d * (k + 2);
        let mut x = Vec::with_capacity(n * inputs);
        let mut y = Vec::with_capacity(n * d);
        for i in 0..n {
            let t = k + i;
            for lag in 0..=k {
                x.extend_from_slice(&series[(t - lag) * d..(t - lag + 1) * d]);
            }
            x.extend_from_slice(&series[t * d..(t + 1) * d]);
            y.extend_from_slice(&series[(t + horizon) * d..(t + horizon + 1) * d]);
        }
        Self {
            inputs,
            outputs: d,
            x,
            y,
            train,
            validation,
        }
    }

    fn len(&self) -> usize {
        self.y.len() / self.outputs
    }

    fn input(&self, i: usize) -> &[f64] {
        &self.x[i * self.inputs..(i + 1) * self.inputs]
    }

    fn target(&self, i: usize) -> &[f64] {
        &self.y[i * self.outputs..(i + 1) * self.outputs]
    }

    fn validation_range(&self) -> std::ops::Range<usize> {
        self.train..self.train + self.validation
    }

    fn test_range(&self) -> std::ops::Range<usize> {
        self.train + self.validation..self.len()
    }
}

struct Adam {
    step: i32,
    m: Gradient,
    v: Gradient,
}

impl Adam {
    fn new(w: &RnnWeights) -> Self {
        Self {
            step: 0,
            m: Gradient::zeros_like(w),
            v: Gradient::zeros_like(w),
        }
    }

    fn update(&mut self, w: &mut RnnWeights, g: &Gradient, lr: f64) {
        self.step += 1;
        let c1 = 1.0 - BETA1.powi(self.step);
        let c2 = 1.0 - BETA2.powi(self.step);
        let (hidden, output) = w.params_mut();
        let layers = [
            (hidden, &g.hidden, &mut self.m.hidden, &mut self.v.hidden),
            (output, &g.output, &mut self.m.output, &mut self.v.output),
        ];
        for (p, g, m, v) in layers {
            for i in 0..p.len() {
                m[i] = BETA1 * m[i] + (1.0 - BETA1) * g[i];
                v[i] = BETA2 * v[i] + (1.0 - BETA2) * g[i] * g[i];
                p[i] -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + EPSILON);
            }
        }
    }
}

/// Trains the real and imaginary networks on a quantized CSI history.
///
/// Uses Adam on shuffled mini-batches. In closed-loop mode the feedback input
/// of every sample is the network's own earlier prediction, refreshed by a
/// free-running pass after each epoch (the first epoch sees teacher values);
/// otherwise it is always the teacher value `ĥ(t)`. The learning rate halves
/// after every `plateau_epochs` epochs without validation improvement,
/// training stops after `patience` such epochs, and the best validation
/// weights are kept. Bit-deterministic given `(history, cfg)`.
pub fn train(history: &[ChannelMatrix], cfg: &RnnConfig) -> Result<TrainedPredictor> {
    cfg.validate()?;
    let first = history.first().ok_or(Error::InsufficientHistory {
        needed: cfg.min_history(),
        got: 0,
    })?;
    let (rows, cols) = first.dims();
    let d = rows * cols;
    for h in history {
        first.check_same_dims(h)?;
        if !h.is_finite() {
            return Err(Error::Config("training history contains non-finite entries".into()));
        }
    }
    let windows = history.len().saturating_sub(cfg.delay_taps + cfg.horizon);
    let n_train = (windows as f64 * cfg.split.train).floor() as usize;
    let n_val = (windows as f64 * cfg.split.validation).floor() as usize;
    let n_test = windows.saturating_sub(n_train + n_val);
    if n_train.min(n_val).min(n_test) < super::MIN_SPLIT_SAMPLES {
        return Err(Error::InsufficientHistory {
            needed: cfg.min_history(),
            got: history.len(),
        });
    }

    let re: Vec<f64> = history.iter().flat_map(|h| h.entries().iter().map(|z| z.re)).collect();
    let im: Vec<f64> = history.iter().flat_map(|h| h.entries().iter().map(|z| z.im)).collect();
    let (real, real_report) = train_network(&Dataset::build(&re, d, cfg, n_train, n_val), cfg, derive(cfg.seed, 1))?;
    let (imag, imag_report) = train_network(&Dataset::build(&im, d, cfg, n_train, n_val), cfg, derive(cfg.seed, 2))?;
    Ok(TrainedPredictor {
        real,
        imag,
        report: TrainingReport {
            real: real_report,
            imag: imag_report,
            train_samples: n_train,
            validation_samples: n_val,
            test_samples: n_test,
        },
    })
}

fn train_network(teacher: &Dataset, cfg: &RnnConfig, seed: u64) -> Result<(RnnWeights, NetworkReport)> {
    let data = teacher;
    // Closed-loop training rewrites the feedback slots of this copy.
    let mut inputs = teacher.x.clone();
    let mut rng = seeded(seed);
    let mut w = RnnWeights::init_uniform(data.inputs, cfg.hidden_neurons, data.outputs, &mut rng);
    let mut adam = Adam::new(&w);
    let mut grad = Gradient::zeros_like(&w);
    let mut scratch = Scratch::for_network(&w);
    let mut order: Vec<usize> = (0..data.train).collect();
    let batch = if cfg.batch_size == 0 { data.train } else { cfg.batch_size.min(data.train) };

    let mut best = (f64::INFINITY, w.clone(), 0usize, f64::NAN);
    let mut stale = 0;
    let mut epochs_run = 0;
    let mut lr = cfg.learning_rate;
    for epoch in 1..=cfg.epochs {
        epochs_run = epoch;
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(batch) {
            grad.clear();
            for &i in chunk {
                let x = &inputs[i * data.inputs..(i + 1) * data.inputs];
                total += w.accumulate_gradient(x, data.target(i), &mut grad, &mut scratch);
            }
            let scale = 1.0 / chunk.len() as f64;
            grad.output.iter_mut().for_each(|g| *g *= scale);
            for (g, p) in grad.hidden.iter_mut().zip(w.hidden_weights()) {
                *g = *g * scale + 2.0 * cfg.weight_decay * p;
            }
            adam.update(&mut w, &grad, lr);
        }
        let train_loss = total / data.train as f64;
        if !train_loss.is_finite() || !w.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        let val = if cfg.closed_loop {
            let free = free_running(&w, data, cfg.horizon);
            refresh_feedback(&mut inputs, &free, data, cfg.horizon);
            range_loss(&free, data, data.validation_range())
        } else {
            teacher_forced_loss(&w, data, data.validation_range())
        };
        if val < best.0 {
            best = (val, w.clone(), epoch, train_loss);
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience.max(1) {
                break;
            }
            if cfg.plateau_epochs > 0 && stale % cfg.plateau_epochs == 0 {
                lr *= 0.5;
            }
        }
    }
    let (_, w, best_epoch, train_loss) = best;

    let free = free_running(&w, data, cfg.horizon);
    let d = data.outputs;
    let range_eta = |range: std::ops::Range<usize>, hold: bool| {
        let len = range.len() as f64;
        range
            .map(|i| {
                let pred = if hold { &data.input(i)[..d] } else { &free[i * d..(i + 1) * d] };
                sq_dist(pred, data.target(i))
            })
            .sum::<f64>()
            / len
    };
    let report = NetworkReport {
        epochs_run,
        best_epoch,
        train_loss,
        validation_eta: range_eta(data.validation_range(), false),
        test_eta: range_eta(data.test_range(), false),
        teacher_forced_test_eta: teacher_forced_loss(&w, data, data.test_range()),
        hold_validation_eta: range_eta(data.validation_range(), true),
        hold_test_eta: range_eta(data.test_range(), true),
    };
    Ok((w, report))
}

fn teacher_forced_loss(w: &RnnWeights, data: &Dataset, range: std::ops::Range<usize>) -> f64 {
    let len = range.len() as f64;
    let mut out = vec![0.0; data.outputs];
    let mut act = vec![0.0; w.hidden()];
    range
        .map(|i| {
            w.forward_into(data.input(i), &mut act, &mut out);
            sq_dist(&out, data.target(i))
        })
        .sum::<f64>()
        / len
}

/// Runs the network over every sample in order, feeding back its own
/// predictions made `K` samples earlier.
fn free_running(w: &RnnWeights, data: &Dataset, horizon: usize) -> Vec<f64> {
    let d = data.outputs;
    let n = data.len();
    let mut preds = vec![0.0; n * d];
    let mut x = vec![0.0; data.inputs];
    let mut act = vec![0.0; w.hidden()];
    let mut out = vec![0.0; d];
    for i in 0..n {
        x.copy_from_slice(data.input(i));
        if i >= horizon {
            x[data.inputs - d..].copy_from_slice(&preds[(i - horizon) * d..(i - horizon + 1) * d]);
        }
        w.forward_into(&x, &mut act, &mut out);
        preds[i * d..(i + 1) * d].copy_from_slice(&out);
    }
    preds
}

/// Writes the prediction made `K` samples earlier into each feedback slot.
fn refresh_feedback(inputs: &mut [f64], preds: &[f64], data: &Dataset, horizon: usize) {
    let d = data.outputs;
    for i in horizon..data.len() {
        let slot = (i + 1) * data.inputs - d;
        inputs[slot..slot + d].copy_from_slice(&preds[(i - horizon) * d..(i - horizon + 1) * d]);
    }
}

fn range_loss(preds: &[f64], data: &Dataset, range: std::ops::Range<usize>) -> f64 {
    let d = data.outputs;
    let len = range.len() as f64;
    range.map(|i| sq_dist(&preds[i * d..(i + 1) * d], data.target(i))).sum::<f64>() / len
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
