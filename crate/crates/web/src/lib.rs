//! Browser bindings: channel autocorrelation, quantizer staircase and a
//! small twin-predictor link run.

use csi_twin::channel::{acf, generate_sequence, sample_autocorrelation, ArModel};
use csi_twin::metrics::{precoding_snr, recovery_mse};
use csi_twin::predictor::RnnConfig;
use csi_twin::protocol::{run_conventional, run_operational, warm_up, LinkConfig};
use csi_twin::quant::{quantize_scalar, QuantizerConfig};
use csi_twin::Resolution;
use wasm_bindgen::prelude::*;

fn js_err(e: csi_twin::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Theoretical `J0(2π f_m n)` for lags `0..=max_lag`, followed by the
/// empirical autocorrelation of entry (1,1) of a generated sequence.
#[wasm_bindgen]
pub fn acf_curves(fm: f64, order: usize, slots: usize, max_lag: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    let model = ArModel::jakes(order, fm, 1, 1).map_err(js_err)?;
    let seq = generate_sequence(&model, slots, seed).map_err(js_err)?;
    let mut out: Vec<f64> = (0..=max_lag).map(|n| acf(n as i64, fm)).collect();
    out.extend((0..=max_lag).map(|n| sample_autocorrelation(&seq, 0, n)));
    Ok(out)
}

/// Quantizer output for `points` inputs evenly spread over `[-1.5r, 1.5r]`,
/// as interleaved `(x, Q(x))` pairs.
#[wasm_bindgen]
pub fn quantizer_staircase(bits: u32, range: f64, points: usize) -> Result<Vec<f64>, JsError> {
    let cfg = QuantizerConfig::new(bits, range).map_err(js_err)?;
    let n = points.max(2);
    Ok((0..n)
        .flat_map(|i| {
            let x = -1.5 * range + 3.0 * range * i as f64 / (n - 1) as f64;
            [x, quantize_scalar(x, &cfg)]
        })
        .collect())
}

/// Summary of one conventional-versus-proposed link run.
#[wasm_bindgen]
pub struct LinkDemo {
    conventional_mse: f64,
    proposed_mse: f64,
    conventional_snr_db: f64,
    proposed_snr_db: f64,
    conventional_bits: f64,
    proposed_bits: f64,
    fallback: bool,
    truth: Vec<f64>,
    conventional_trace: Vec<f64>,
    proposed_trace: Vec<f64>,
}

#[wasm_bindgen]
impl LinkDemo {
    #[wasm_bindgen(getter)]
    pub fn conventional_mse(&self) -> f64 {
        self.conventional_mse
    }
    #[wasm_bindgen(getter)]
    pub fn proposed_mse(&self) -> f64 {
        self.proposed_mse
    }
    #[wasm_bindgen(getter)]
    pub fn conventional_snr_db(&self) -> f64 {
        self.conventional_snr_db
    }
    #[wasm_bindgen(getter)]
    pub fn proposed_snr_db(&self) -> f64 {
        self.proposed_snr_db
    }
    #[wasm_bindgen(getter)]
    pub fn conventional_bits(&self) -> f64 {
        self.conventional_bits
    }
    #[wasm_bindgen(getter)]
    pub fn proposed_bits(&self) -> f64 {
        self.proposed_bits
    }
    /// The trained network lost to persistence and was replaced by it.
    #[wasm_bindgen(getter)]
    pub fn fallback(&self) -> bool {
        self.fallback
    }
    /// Real part of entry (1,1) of the true channel per operational slot.
    #[wasm_bindgen(getter)]
    pub fn truth(&self) -> Vec<f64> {
        self.truth.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn conventional_trace(&self) -> Vec<f64> {
        self.conventional_trace.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn proposed_trace(&self) -> Vec<f64> {
        self.proposed_trace.clone()
    }
}

/// Runs both schemes on one 1×2 channel: `warmup` slots of training data,
/// then `slots` operational slots at `bits` per real component.
#[wasm_bindgen]
pub fn simulate_link(fm: f64, bits: u32, warmup: usize, slots: usize, epochs: usize, seed: u64) -> Result<LinkDemo, JsError> {
    let cfg = LinkConfig {
        warmup_slots: warmup,
        rnn: RnnConfig {
            epochs: epochs.max(1),
            seed: seed.wrapping_add(1),
            ..RnnConfig::default()
        },
        ..LinkConfig::default()
    };
    let model = ArModel::jakes(1, fm, 1, 2).map_err(js_err)?;
    let channel = generate_sequence(&model, warmup + slots, seed).map_err(js_err)?;
    let operational = &channel[warmup..];
    let res = Resolution::Bits(bits);
    let conv = run_conventional(operational, &cfg, res).map_err(js_err)?;
    let link = warm_up(&channel, &cfg).map_err(js_err)?;
    let shared = link.train().map_err(js_err)?;
    let prop = run_operational(link, &shared, operational, res).map_err(js_err)?;
    let first = |t: &csi_twin::protocol::LinkTrace, truth: bool| -> Vec<f64> {
        t.records
            .iter()
            .map(|r| if truth { r.truth.entries()[0].re } else { r.reconstruction.entries()[0].re })
            .collect()
    };
    Ok(LinkDemo {
        conventional_mse: recovery_mse(&conv).map_err(js_err)?,
        proposed_mse: recovery_mse(&prop).map_err(js_err)?,
        conventional_snr_db: precoding_snr(&conv, 1.0).map_err(js_err)?.db,
        proposed_snr_db: precoding_snr(&prop, 1.0).map_err(js_err)?.db,
        conventional_bits: csi_twin::metrics::overhead(&conv),
        proposed_bits: csi_twin::metrics::overhead(&prop),
        fallback: shared.uses_fallback(),
        truth: first(&conv, true),
        conventional_trace: first(&conv, false),
        proposed_trace: first(&prop, false),
    })
}
