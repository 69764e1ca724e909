//! Residual CSI feedback with twin recurrent channel predictors.
//!
//! A base station (BS) and a mobile terminal (MT) each run an identical
//! recurrent predictor trained on the same quantized CSI history. After
//! training, the MT reports only the quantized difference between the shared
//! prediction and its channel estimate, and the BS adds it back onto its own
//! copy of the prediction. The crate contains everything needed to evaluate
//! that scheme against plain quantized feedback:
//!
//! - [`channel`]: Jakes-correlated AR(u) MIMO flat-fading sequences.
//! - [`quant`]: element-wise mid-rise scalar quantization.
//! - [`predictor`]: single-hidden-layer tanh RNN, Adam training, inference state.
//! - [`protocol`]: conventional and twin-predictor feedback state machines.
//! - [`metrics`]: recovery MSE, matched-filter precoding SNR, overhead.
//! - [`harness`]: configuration, seeded Monte-Carlo sweeps, CSV/SVG export.

pub mod channel;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod predictor;
pub mod protocol;
pub mod quant;
pub mod rng;

pub use channel::{ArModel, ChannelMatrix, DopplerParams};
pub use error::{Error, Result};
pub use quant::{ClipRange, QuantizerConfig, Resolution};

pub use num_complex::Complex64;
