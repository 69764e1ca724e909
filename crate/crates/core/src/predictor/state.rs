use std::collections::VecDeque;

use num_complex::Complex64;

use super::network::RnnWeights;
use super::{mat_to_vec, vec_to_mat};
use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};

/// `x(t) = [ĥ(t), ĥ(t−1), …, ĥ(t−k), h̃(t)]` from a newest-first buffer.
pub fn build_input(buffer: &[ChannelMatrix], feedback: &ChannelMatrix, delay_taps: usize) -> Result<Vec<Complex64>> {
    if buffer.len() < delay_taps + 1 {
        return Err(Error::NotReady {
            have: buffer.len(),
            need: delay_taps + 1,
        });
    }
    let mut x = Vec::with_capacity(feedback.len() * (delay_taps + 2));
    for h in &buffer[..=delay_taps] {
        feedback.check_same_dims(h)?;
        x.extend_from_slice(h.entries());
    }
    x.extend(mat_to_vec(feedback));
    Ok(x)
}

/// The mapping shared by both ends of the link.
#[derive(Debug, Clone, PartialEq)]
pub enum Predictor {
    /// Twin real-valued networks for the real and imaginary parts.
    Recurrent { real: RnnWeights, imag: RnnWeights },
    /// `h̃(t+K) = ĥ(t)`.
    Persistence,
}

impl Predictor {
    pub fn is_recurrent(&self) -> bool {
        matches!(self, Predictor::Recurrent { .. })
    }

    /// Applies the predictor to a full input vector of `d·(k+2)` entries.
    pub fn evaluate(&self, x: &[Complex64], rows: usize, cols: usize) -> Result<ChannelMatrix> {
        let d = rows * cols;
        match self {
            Predictor::Persistence => {
                if x.len() < d {
                    return Err(Error::Dimension {
                        expected: d,
                        actual: x.len(),
                    });
                }
                vec_to_mat(&x[..d], rows, cols)
            }
            Predictor::Recurrent { real, imag } => {
                let re: Vec<f64> = x.iter().map(|z| z.re).collect();
                let im: Vec<f64> = x.iter().map(|z| z.im).collect();
                let yr = real.forward(&re)?;
                let yi = imag.forward(&im)?;
                let v: Vec<Complex64> = yr.into_iter().zip(yi).map(|(a, b)| Complex64::new(a, b)).collect();
                vec_to_mat(&v, rows, cols)
            }
        }
    }

    pub fn bit_eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Predictor::Persistence, Predictor::Persistence) => true,
            (Predictor::Recurrent { real: a, imag: b }, Predictor::Recurrent { real: c, imag: d }) => {
                a.bit_eq(c) && b.bit_eq(d)
            }
            _ => false,
        }
    }

    fn check_shape(&self, rows: usize, cols: usize, delay_taps: usize) -> Result<()> {
        if let Predictor::Recurrent { real, imag } = self {
            let d = rows * cols;
            for w in [real, imag] {
                if w.inputs() != d * (delay_taps + 2) {
                    return Err(Error::Dimension {
                        expected: d * (delay_taps + 2),
                        actual: w.inputs(),
                    });
                }
                if w.outputs() != d {
                    return Err(Error::Dimension {
                        expected: d,
                        actual: w.outputs(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Inference state: delay line plus the predictions still in flight.
#[derive(Debug, Clone)]
pub struct PredictorState {
    predictor: Predictor,
    rows: usize,
    cols: usize,
    delay_taps: usize,
    horizon: usize,
    /// Newest first, at most `k+1` long.
    delay_buffer: Vec<ChannelMatrix>,
    /// Predictions for `t, t+1, …, t+K−1`; the front targets the current slot.
    inflight: VecDeque<ChannelMatrix>,
    last_prediction: Option<ChannelMatrix>,
}

impl PredictorState {
    pub fn new(predictor: Predictor, rows: usize, cols: usize, delay_taps: usize, horizon: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Config("channel dimensions must be positive".into()));
        }
        if horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        predictor.check_shape(rows, cols, delay_taps)?;
        Ok(Self {
            predictor,
            rows,
            cols,
            delay_taps,
            horizon,
            delay_buffer: Vec::with_capacity(delay_taps + 1),
            inflight: VecDeque::with_capacity(horizon),
            last_prediction: None,
        })
    }

    pub fn predictor(&self) -> &Predictor {
        &self.predictor
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn delay_buffer(&self) -> &[ChannelMatrix] {
        &self.delay_buffer
    }

    /// Most recent output of [`PredictorState::predict`].
    pub fn last_prediction(&self) -> Option<&ChannelMatrix> {
        self.last_prediction.as_ref()
    }

    /// Prediction targeting the slot about to be ingested.
    pub fn current_prediction(&self) -> Option<&ChannelMatrix> {
        self.inflight.front()
    }

    pub fn is_warm(&self) -> bool {
        self.delay_buffer.len() == self.delay_taps + 1 && !self.inflight.is_empty()
    }

    pub fn ingest(&mut self, h: ChannelMatrix) -> Result<()> {
        if h.dims() != (self.rows, self.cols) {
            return Err(Error::Dimension {
                expected: self.rows * self.cols,
                actual: h.len(),
            });
        }
        self.delay_buffer.insert(0, h);
        self.delay_buffer.truncate(self.delay_taps + 1);
        Ok(())
    }

    /// Loads the tail of a recorded history with teacher-forced feedback, so
    /// the next [`predict`](Self::predict) targets the slot `K` past the last
    /// history entry.
    pub fn prime(&mut self, history: &[ChannelMatrix]) -> Result<()> {
        let n = history.len();
        let need = self.delay_taps + self.horizon;
        if n < need {
            return Err(Error::InsufficientHistory { needed: need, got: n });
        }
        let newest_first = |t: usize| -> Vec<ChannelMatrix> { (0..=self.delay_taps).map(|i| history[t - i].clone()).collect() };
        let last = n - 1;
        let mut inflight = VecDeque::with_capacity(self.horizon);
        inflight.push_back(history[last].clone());
        for j in 1..self.horizon {
            let tau = last + j - self.horizon;
            let x = build_input(&newest_first(tau), &history[tau], self.delay_taps)?;
            inflight.push_back(self.predictor.evaluate(&x, self.rows, self.cols)?);
        }
        for h in &history[n - self.delay_taps - 1..] {
            self.ingest(h.clone())?;
        }
        self.inflight = inflight;
        self.last_prediction = None;
        Ok(())
    }

    /// `h̃(t+K)` from the delay line and the feedback `h̃(t)`.
    pub fn predict(&mut self) -> Result<ChannelMatrix> {
        if self.delay_buffer.len() < self.delay_taps + 1 {
            return Err(Error::NotReady {
                have: self.delay_buffer.len(),
                need: self.delay_taps + 1,
            });
        }
        let feedback = self.inflight.pop_front().ok_or(Error::NotReady { have: 0, need: 1 })?;
        let x = build_input(&self.delay_buffer, &feedback, self.delay_taps)?;
        let y = self.predictor.evaluate(&x, self.rows, self.cols)?;
        self.inflight.push_back(y.clone());
        self.last_prediction = Some(y.clone());
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(v: f64) -> ChannelMatrix {
        ChannelMatrix::from_entries(1, 2, vec![Complex64::new(v, -v); 2]).unwrap()
    }

    #[test]
    fn input_layout_and_length() {
        let x = build_input(&[m(1.0), m(2.0)], &m(3.0), 1).unwrap();
        assert_eq!(x.len(), 6);
        assert_eq!(x[0].re, 1.0);
        assert_eq!(x[2].re, 2.0);
        assert_eq!(x[4].re, 3.0);
        assert_eq!(build_input(&[m(1.0)], &m(0.0), 0).unwrap().len(), 4);
        assert!(build_input(&[m(0.0), m(0.0)], &m(0.0), 1).unwrap().iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn cold_buffer_not_ready() {
        assert!(matches!(build_input(&[m(1.0)], &m(0.0), 1), Err(Error::NotReady { have: 1, need: 2 })));
        let mut s = PredictorState::new(Predictor::Persistence, 1, 2, 1, 1).unwrap();
        assert!(matches!(s.predict(), Err(Error::NotReady { .. })));
    }

    #[test]
    fn zero_weights_predict_zero() {
        let p = Predictor::Recurrent {
            real: RnnWeights::zeros(6, 16, 2),
            imag: RnnWeights::zeros(6, 16, 2),
        };
        let mut s = PredictorState::new(p, 1, 2, 1, 1).unwrap();
        s.prime(&[m(0.3), m(0.7)]).unwrap();
        assert!(s.is_warm());
        assert_eq!(s.predict().unwrap().norm_sqr(), 0.0);
    }

    #[test]
    fn persistence_repeats_newest() {
        let mut s = PredictorState::new(Predictor::Persistence, 1, 2, 1, 1).unwrap();
        s.prime(&[m(0.1), m(0.2)]).unwrap();
        assert!(s.current_prediction().unwrap().bit_eq(&m(0.2)));
        assert!(s.predict().unwrap().bit_eq(&m(0.2)));
        s.ingest(m(0.5)).unwrap();
        assert!(s.predict().unwrap().bit_eq(&m(0.5)));
    }

    #[test]
    fn horizon_queue_length() {
        let mut s = PredictorState::new(Predictor::Persistence, 1, 2, 1, 3).unwrap();
        assert!(s.prime(&[m(0.1), m(0.2), m(0.3)]).is_err());
        s.prime(&[m(0.1), m(0.2), m(0.3), m(0.4)]).unwrap();
        // In-flight predictions target slots 3, 4, 5; the ones for 4 and 5
        // were made at slots 1 and 2.
        assert!(s.current_prediction().unwrap().bit_eq(&m(0.4)));
        assert!(s.predict().unwrap().bit_eq(&m(0.4)));
        s.ingest(m(0.5)).unwrap();
        assert!(s.current_prediction().unwrap().bit_eq(&m(0.2)));
    }

    #[test]
    fn shape_mismatch_rejected() {
        let p = Predictor::Recurrent {
            real: RnnWeights::zeros(5, 4, 2),
            imag: RnnWeights::zeros(6, 4, 2),
        };
        assert!(PredictorState::new(p, 1, 2, 1, 1).is_err());
        let mut s = PredictorState::new(Predictor::Persistence, 1, 2, 1, 1).unwrap();
        assert!(s.ingest(ChannelMatrix::zeros(2, 1)).is_err());
    }
}
