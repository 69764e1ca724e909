//! Recurrent K-step-ahead channel predictor.
//!
//! The complex channel is handled by two independent real-valued networks,
//! one fed the real parts and one fed the imaginary parts of the input
//! vector. Each network is `y = V · tanh(W · x)` with
//! `x = [ĥ(t), ĥ(t−1), …, ĥ(t−k), h̃(t)]`.

mod io;
mod network;
mod state;
mod train;

pub use io::{decode_predictor, encode_predictor, read_predictor, write_predictor};
pub use network::{output_index, Gradient, RnnWeights, Scratch};
pub use state::{build_input, Predictor, PredictorState};
pub use train::{train, NetworkReport, TrainedPredictor, TrainingReport};

use num_complex::Complex64;

use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};

/// Chronological train/validation/test fractions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for Split {
    fn default() -> Self {
        Self {
            train: 0.8,
            validation: 0.1,
            test: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RnnConfig {
    /// `k`: number of past samples beyond the newest in the delay line.
    pub delay_taps: usize,
    /// `K`: prediction horizon in slots.
    pub horizon: usize,
    /// `M_h`.
    pub hidden_neurons: usize,
    /// `τ`: maximum number of epochs.
    pub epochs: usize,
    pub learning_rate: f64,
    /// Mini-batch size; 0 means full batch.
    pub batch_size: usize,
    /// L2 penalty on the hidden-layer weights.
    pub weight_decay: f64,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    /// Halve the learning rate after this many epochs without validation
    /// improvement; 0 keeps it fixed.
    pub plateau_epochs: usize,
    /// Train with the network's own predictions as feedback input instead
    /// of teacher forcing.
    pub closed_loop: bool,
    pub seed: u64,
    pub split: Split,
}

impl Default for RnnConfig {
    fn default() -> Self {
        Self {
            delay_taps: 1,
            horizon: 1,
            hidden_neurons: 16,
            epochs: 500,
            learning_rate: 1e-3,
            batch_size: 128,
            weight_decay: 1e-2,
            patience: 50,
            plateau_epochs: 0,
            closed_loop: true,
            seed: 0,
            split: Split::default(),
        }
    }
}

/// Fewest samples any split may hold.
pub const MIN_SPLIT_SAMPLES: usize = 4;

impl RnnConfig {
    pub fn validate(&self) -> Result<()> {
        let s = self.split;
        let parts = [s.train, s.validation, s.test];
        if parts.iter().any(|p| !p.is_finite() || *p <= 0.0) || ((s.train + s.validation + s.test) - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "split fractions must be positive and sum to 1, got {}/{}/{}",
                s.train, s.validation, s.test
            )));
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if self.hidden_neurons == 0 {
            return Err(Error::Config("hidden_neurons must be at least 1".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config(format!("learning_rate must be positive, got {}", self.learning_rate)));
        }
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return Err(Error::Config(format!("weight_decay must be nonnegative, got {}", self.weight_decay)));
        }
        Ok(())
    }

    /// `M = N_r·N_t·(k+2)`.
    pub fn input_size(&self, rows: usize, cols: usize) -> usize {
        rows * cols * (self.delay_taps + 2)
    }

    /// Shortest history that leaves `MIN_SPLIT_SAMPLES` in every split.
    pub fn min_history(&self) -> usize {
        let smallest = self.split.train.min(self.split.validation).min(self.split.test);
        let windows = (MIN_SPLIT_SAMPLES as f64 / smallest).ceil() as usize + 3;
        self.delay_taps + self.horizon + windows
    }
}

/// Row-major unrolling `[h_11, h_12, …, h_{N_r N_t}]`.
pub fn mat_to_vec(h: &ChannelMatrix) -> Vec<Complex64> {
    h.entries().to_vec()
}

pub fn vec_to_mat(v: &[Complex64], rows: usize, cols: usize) -> Result<ChannelMatrix> {
    ChannelMatrix::from_entries(rows, cols, v.to_vec())
}

/// Mean squared Frobenius distance between paired predictions and targets.
pub fn eta_mse(predictions: &[ChannelMatrix], targets: &[ChannelMatrix]) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::Empty("prediction sequence"));
    }
    if predictions.len() != targets.len() {
        return Err(Error::Dimension {
            expected: predictions.len(),
            actual: targets.len(),
        });
    }
    let mut total = 0.0;
    for (p, t) in predictions.iter().zip(targets) {
        total += p.distance_sqr(t)?;
    }
    Ok(total / predictions.len() as f64)
}

/// Multiplication counts and complexity orders of one real-valued network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Complexity {
    /// `κ_r = N_r·N_t·(k+3)·M_h`.
    pub multiplications: usize,
    /// `δ = N_r·N_t`.
    pub delta: usize,
    /// `ϱ = k·M_h`.
    pub rho: usize,
}

impl Complexity {
    /// `O(δϱ)` for one prediction.
    pub fn prediction_order(&self) -> usize {
        self.delta * self.rho
    }

    /// `O(δϱSτ)` for training on `samples` blocks over `epochs`.
    pub fn training_order(&self, samples: usize, epochs: usize) -> usize {
        self.prediction_order() * samples * epochs
    }
}

pub fn complexity(cfg: &RnnConfig, rows: usize, cols: usize) -> Complexity {
    let delta = rows * cols;
    Complexity {
        multiplications: delta * (cfg.delay_taps + 3) * cfg.hidden_neurons,
        delta,
        rho: cfg.delay_taps * cfg.hidden_neurons,
    }
}

/// Layer-by-layer count `M·M_h + M_o·M_h`.
pub fn layer_multiplications(inputs: usize, outputs: usize, hidden: usize) -> usize {
    inputs * hidden + outputs * hidden
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unroll_row_major() {
        let h = ChannelMatrix::from_rows(&[vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(3.0, 0.0), c(4.0, 0.0)]]).unwrap();
        let v = mat_to_vec(&h);
        assert_eq!(v, vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
        assert!(vec_to_mat(&v, 2, 2).unwrap().bit_eq(&h));
        assert!(vec_to_mat(&v, 1, 3).is_err());
    }

    #[test]
    fn eta_examples() {
        let a = ChannelMatrix::from_entries(1, 1, vec![c(0.5, 0.0)]).unwrap();
        let b = ChannelMatrix::from_entries(1, 1, vec![c(0.4, 0.0)]).unwrap();
        assert!((eta_mse(std::slice::from_ref(&a), &[b]).unwrap() - 0.01).abs() < 1e-15);
        assert_eq!(eta_mse(std::slice::from_ref(&a), std::slice::from_ref(&a)).unwrap(), 0.0);
        assert!(matches!(eta_mse(&[], &[]), Err(Error::Empty(_))));
    }

    #[test]
    fn complexity_examples() {
        let cfg = RnnConfig::default();
        let k = complexity(&cfg, 1, 2);
        assert_eq!(k.multiplications, 128);
        assert_eq!(layer_multiplications(cfg.input_size(1, 2), 2, 16), 128);
        assert_eq!((k.delta, k.rho, k.prediction_order()), (2, 16, 32));
        let tiny = RnnConfig {
            delay_taps: 0,
            hidden_neurons: 1,
            ..RnnConfig::default()
        };
        assert_eq!(complexity(&tiny, 1, 1).multiplications, 3);
    }

    #[test]
    fn input_size_formula() {
        let cfg = RnnConfig::default();
        assert_eq!(cfg.input_size(1, 2), 6);
        let k0 = RnnConfig {
            delay_taps: 0,
            ..cfg
        };
        assert_eq!(k0.input_size(2, 3), 12);
    }

    #[test]
    fn config_validation() {
        assert!(RnnConfig::default().validate().is_ok());
        let bad = RnnConfig {
            split: Split {
                train: 0.8,
                validation: 0.1,
                test: 0.2,
            },
            ..RnnConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(RnnConfig { horizon: 0, ..RnnConfig::default() }.validate().is_err());
        assert!(RnnConfig { hidden_neurons: 0, ..RnnConfig::default() }.validate().is_err());
    }
}
