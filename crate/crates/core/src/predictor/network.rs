use rand::Rng;

use crate::error::{Error, Result};

/// Weights of one single-hidden-layer network `y = V · tanh(W · x)`.
///
/// No bias terms; the output layer is linear.
#[derive(Debug, Clone, PartialEq)]
pub struct RnnWeights {
    inputs: usize,
    hidden: usize,
    outputs: usize,
    /// `M_h × M`, row `j` is `w_j`.
    hidden_weights: Vec<f64>,
    /// `M_o × M_h`, entry `(o, j)` is `v_oj`.
    output_weights: Vec<f64>,
}

/// Per-sample gradient buffers, shaped like [`RnnWeights`].
#[derive(Debug, Clone)]
pub struct Gradient {
    pub hidden: Vec<f64>,
    pub output: Vec<f64>,
}

impl Gradient {
    pub fn zeros_like(w: &RnnWeights) -> Self {
        Self {
            hidden: vec![0.0; w.hidden_weights.len()],
            output: vec![0.0; w.output_weights.len()],
        }
    }

    pub fn clear(&mut self) {
        self.hidden.iter_mut().for_each(|g| *g = 0.0);
        self.output.iter_mut().for_each(|g| *g = 0.0);
    }
}

impl RnnWeights {
    pub fn zeros(inputs: usize, hidden: usize, outputs: usize) -> Self {
        Self {
            inputs,
            hidden,
            outputs,
            hidden_weights: vec![0.0; hidden * inputs],
            output_weights: vec![0.0; outputs * hidden],
        }
    }

    /// Uniform fan-in initialization: hidden weights in `±1/√M`, output
    /// weights in `±1/√M_h`.
    pub fn init_uniform<R: Rng + ?Sized>(inputs: usize, hidden: usize, outputs: usize, rng: &mut R) -> Self {
        let a = 1.0 / (inputs as f64).sqrt();
        let b = 1.0 / (hidden as f64).sqrt();
        let hidden_weights = (0..hidden * inputs).map(|_| rng.random_range(-a..=a)).collect();
        let output_weights = (0..outputs * hidden).map(|_| rng.random_range(-b..=b)).collect();
        Self {
            inputs,
            hidden,
            outputs,
            hidden_weights,
            output_weights,
        }
    }

    pub fn from_parts(
        inputs: usize,
        hidden: usize,
        outputs: usize,
        hidden_weights: Vec<f64>,
        output_weights: Vec<f64>,
    ) -> Result<Self> {
        if inputs == 0 || hidden == 0 || outputs == 0 {
            return Err(Error::Config(format!(
                "network layers must be nonempty, got {inputs}-{hidden}-{outputs}"
            )));
        }
        if hidden_weights.len() != hidden * inputs {
            return Err(Error::Dimension {
                expected: hidden * inputs,
                actual: hidden_weights.len(),
            });
        }
        if output_weights.len() != outputs * hidden {
            return Err(Error::Dimension {
                expected: outputs * hidden,
                actual: output_weights.len(),
            });
        }
        if hidden_weights.iter().chain(&output_weights).any(|w| !w.is_finite()) {
            return Err(Error::Config("network weights must be finite".into()));
        }
        Ok(Self {
            inputs,
            hidden,
            outputs,
            hidden_weights,
            output_weights,
        })
    }

    /// `M`.
    pub fn inputs(&self) -> usize {
        self.inputs
    }

    /// `M_h`.
    pub fn hidden(&self) -> usize {
        self.hidden
    }

    /// `M_o`.
    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn hidden_weights(&self) -> &[f64] {
        &self.hidden_weights
    }

    pub fn output_weights(&self) -> &[f64] {
        &self.output_weights
    }

    pub(crate) fn params_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.hidden_weights, &mut self.output_weights)
    }

    pub fn hidden_weight(&self, j: usize, m: usize) -> f64 {
        self.hidden_weights[j * self.inputs + m]
    }

    pub fn output_weight(&self, o: usize, j: usize) -> f64 {
        self.output_weights[o * self.hidden + j]
    }

    pub fn is_finite(&self) -> bool {
        self.hidden_weights.iter().chain(&self.output_weights).all(|w| w.is_finite())
    }

    /// Bitwise equality of all weights.
    pub fn bit_eq(&self, other: &Self) -> bool {
        let same = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits());
        (self.inputs, self.hidden, self.outputs) == (other.inputs, other.hidden, other.outputs)
            && same(&self.hidden_weights, &other.hidden_weights)
            && same(&self.output_weights, &other.output_weights)
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.inputs {
            return Err(Error::Dimension {
                expected: self.inputs,
                actual: x.len(),
            });
        }
        let mut activations = vec![0.0; self.hidden];
        let mut out = vec![0.0; self.outputs];
        self.forward_into(x, &mut activations, &mut out);
        Ok(out)
    }

    /// `a_j = tanh(w_j · x)`, `y_o = Σ_j v_oj a_j`.
    pub(crate) fn forward_into(&self, x: &[f64], activations: &mut [f64], out: &mut [f64]) {
        for (a, w) in activations.iter_mut().zip(self.hidden_weights.chunks_exact(self.inputs)) {
            *a = dot(w, x).tanh();
        }
        for (y, v) in out.iter_mut().zip(self.output_weights.chunks_exact(self.hidden)) {
            *y = dot(v, activations);
        }
    }

    /// Squared error `Σ_o (y_o − t_o)²` of one sample; accumulates its
    /// gradient into `grad`.
    pub fn accumulate_gradient(&self, x: &[f64], target: &[f64], grad: &mut Gradient, scratch: &mut Scratch) -> f64 {
        let Scratch { activations, out, delta } = scratch;
        self.forward_into(x, activations, out);
        let mut loss = 0.0;
        for o in 0..self.outputs {
            let e = out[o] - target[o];
            loss += e * e;
            let ge = 2.0 * e;
            let row = &mut grad.output[o * self.hidden..(o + 1) * self.hidden];
            for (g, a) in row.iter_mut().zip(activations.iter()) {
                *g += ge * a;
            }
            out[o] = ge;
        }
        for (j, d) in delta.iter_mut().enumerate() {
            let back: f64 = (0..self.outputs).map(|o| out[o] * self.output_weights[o * self.hidden + j]).sum();
            *d = back * (1.0 - activations[j] * activations[j]);
        }
        for (row, d) in grad.hidden.chunks_exact_mut(self.inputs).zip(delta.iter()) {
            for (g, xm) in row.iter_mut().zip(x) {
                *g += d * xm;
            }
        }
        loss
    }

    pub fn sample_loss(&self, x: &[f64], target: &[f64]) -> Result<f64> {
        let y = self.forward(x)?;
        Ok(y.iter().zip(target).map(|(a, b)| (a - b).powi(2)).sum())
    }
}

/// Reusable buffers for [`RnnWeights::accumulate_gradient`].
#[derive(Debug, Clone)]
pub struct Scratch {
    activations: Vec<f64>,
    out: Vec<f64>,
    delta: Vec<f64>,
}

impl Scratch {
    pub fn for_network(w: &RnnWeights) -> Self {
        Self {
            activations: vec![0.0; w.hidden],
            out: vec![0.0; w.outputs],
            delta: vec![0.0; w.hidden],
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Output neuron (1-based) carrying subchannel `(n_r, n_t)`: `n_t + (n_r − 1)·N_t`.
pub fn output_index(n_r: usize, n_t: usize, num_tx: usize) -> usize {
    n_t + (n_r - 1) * num_tx
}
