//! Conventional and twin-predictor CSI feedback.
//!
//! Conventional feedback sends `Q_f(H)` every slot. The proposed scheme runs
//! a warm-up phase of conventional feedback whose quantized history trains
//! identical predictors at both ends; afterwards the MT sends only
//! `Q_p(h̃(t) − H(t))` and the BS recovers `Ĥ_BS(t) = h̃(t) − payload`. Both
//! predictors then ingest `Ĥ_BS(t)`, which each side can compute, so the
//! twins stay bit-identical without extra signaling.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;

use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::predictor::{train, Predictor, PredictorState, RnnConfig, TrainingReport};
use crate::quant::{quantize_matrix, ClipRange, QuantizerConfig, Resolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Conventional,
    Proposed,
}

impl Scheme {
    pub const ALL: [Scheme; 2] = [Scheme::Conventional, Scheme::Proposed];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Conventional => "conventional",
            Scheme::Proposed => "proposed",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "conventional" => Ok(Scheme::Conventional),
            "proposed" => Ok(Scheme::Proposed),
            other => Err(Error::Config(format!("unknown scheme `{other}`"))),
        }
    }
}

/// One feedback transmission from MT to BS.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackMessage {
    pub slot: usize,
    /// Quantized residual (or quantized CSI for conventional feedback).
    /// `None` marks an empty message.
    pub payload: Option<ChannelMatrix>,
    /// Rounding error of the payload; only present for lossless residuals,
    /// where `payload + correction` is the exact residual.
    pub correction: Option<ChannelMatrix>,
    pub bit_cost: u64,
}

impl FeedbackMessage {
    pub fn is_empty(&self) -> bool {
        self.payload.is_none()
    }
}

/// `Ĥ_BS = Q_f(H_MT)` and its cost `2·N_r·N_t·b`.
pub fn conventional_feedback(h_mt: &ChannelMatrix, cfg: &QuantizerConfig) -> (ChannelMatrix, u64) {
    (quantize_matrix(h_mt, cfg), cfg.matrix_bits(h_mt.rows(), h_mt.cols()))
}

/// Error-free transformation: `s + e == a + b` exactly.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Residual report `Q_p(h̃ − Ĥ_MT)`.
///
/// The message is left empty when sending the quantized residual would not
/// bring the BS closer to the estimate than the prediction alone, which
/// includes an exactly zero residual.
pub fn mt_report(estimate: &ChannelMatrix, prediction: &ChannelMatrix, cfg: &QuantizerConfig, slot: usize) -> Result<FeedbackMessage> {
    estimate.check_same_dims(prediction)?;
    let (rows, cols) = estimate.dims();
    let empty = FeedbackMessage {
        slot,
        payload: None,
        correction: None,
        bit_cost: 0,
    };
    if cfg.is_lossless() {
        let mut hi = Vec::with_capacity(estimate.len());
        let mut lo = Vec::with_capacity(estimate.len());
        for (p, h) in prediction.entries().iter().zip(estimate.entries()) {
            let (re, re_err) = two_sum(p.re, -h.re);
            let (im, im_err) = two_sum(p.im, -h.im);
            hi.push(Complex64::new(re, im));
            lo.push(Complex64::new(re_err, im_err));
        }
        if hi.iter().chain(&lo).all(|z| z.re == 0.0 && z.im == 0.0) {
            return Ok(empty);
        }
        return Ok(FeedbackMessage {
            slot,
            payload: Some(ChannelMatrix::from_entries(rows, cols, hi)?),
            correction: Some(ChannelMatrix::from_entries(rows, cols, lo)?),
            bit_cost: cfg.matrix_bits(rows, cols),
        });
    }
    let residual = prediction - estimate;
    let payload = quantize_matrix(&residual, cfg);
    if residual.distance_sqr(&payload)? >= residual.norm_sqr() {
        return Ok(empty);
    }
    Ok(FeedbackMessage {
        slot,
        payload: Some(payload),
        correction: None,
        bit_cost: cfg.matrix_bits(rows, cols),
    })
}

/// `Ĥ_BS = h̃ − payload`; an empty message leaves the prediction unchanged.
pub fn bs_reconstruct(prediction: &ChannelMatrix, msg: &FeedbackMessage) -> Result<ChannelMatrix> {
    let Some(payload) = &msg.payload else {
        return Ok(prediction.clone());
    };
    prediction.check_same_dims(payload)?;
    match &msg.correction {
        None => Ok(prediction - payload),
        Some(lo) => {
            prediction.check_same_dims(lo)?;
            let exact = |p: f64, hi: f64, lo: f64| {
                let (s, e) = two_sum(p, -hi);
                s + (e - lo)
            };
            let entries = prediction
                .entries()
                .iter()
                .zip(payload.entries())
                .zip(lo.entries())
                .map(|((p, hi), lo)| Complex64::new(exact(p.re, hi.re, lo.re), exact(p.im, hi.im, lo.im)))
                .collect();
            let (rows, cols) = prediction.dims();
            ChannelMatrix::from_entries(rows, cols, entries)
        }
    }
}

/// Parameters of one feedback link.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    /// Conventional-feedback slots collected before training.
    pub warmup_slots: usize,
    /// Quantizer resolution used during warm-up.
    pub warmup_resolution: Resolution,
    /// Per-entry channel power `E|h|²`.
    pub channel_variance: f64,
    /// Clip range in standard deviations of one real component, used by
    /// the `Auto` ranges below.
    pub range_factor: f64,
    /// Clip range of the full-CSI quantizer (conventional and warm-up).
    pub csi_range: ClipRange,
    /// Clip range of the residual quantizer.
    pub residual_range: ClipRange,
    pub rnn: RnnConfig,
    /// Fall back to a persistence predictor when the trained network does
    /// not beat it on the validation split.
    pub hold_fallback: bool,
    /// Train the BS copy separately and require bit-identical weights,
    /// instead of cloning the MT result.
    pub verify_twin_training: bool,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            warmup_slots: 10_000,
            warmup_resolution: Resolution::Bits(5),
            channel_variance: 1.0,
            range_factor: 3.0,
            csi_range: ClipRange::Auto,
            residual_range: ClipRange::Auto,
            rnn: RnnConfig::default(),
            hold_fallback: true,
            verify_twin_training: false,
        }
    }
}

impl LinkConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.channel_variance.is_finite() && self.channel_variance > 0.0) {
            return Err(Error::Config(format!("channel variance must be positive, got {}", self.channel_variance)));
        }
        if !(self.range_factor.is_finite() && self.range_factor > 0.0) {
            return Err(Error::Config(format!("range factor must be positive, got {}", self.range_factor)));
        }
        self.csi_range.validate()?;
        self.residual_range.validate()?;
        if self.rnn.horizon != 1 {
            return Err(Error::Unsupported(format!(
                "residual feedback needs a one-slot horizon, got {}",
                self.rnn.horizon
            )));
        }
        self.rnn.validate()?;
        if self.warmup_slots < self.rnn.min_history() {
            return Err(Error::InsufficientHistory {
                needed: self.rnn.min_history(),
                got: self.warmup_slots,
            });
        }
        self.warmup_quantizer().validate()
    }

    /// Quantizer sized for the channel entries themselves.
    pub fn csi_quantizer(&self, resolution: Resolution) -> Result<QuantizerConfig> {
        match resolution {
            Resolution::Lossless => Ok(QuantizerConfig::lossless()),
            Resolution::Bits(b) => QuantizerConfig::new(b, self.csi_range.resolve(self.range_factor * (0.5 * self.channel_variance).sqrt())),
        }
    }

    pub fn warmup_quantizer(&self) -> QuantizerConfig {
        self.csi_quantizer(self.warmup_resolution).unwrap_or(QuantizerConfig {
            resolution: self.warmup_resolution,
            clip_range: f64::NAN,
        })
    }
}

/// Predictor agreed on by both ends at the end of warm-up.
#[derive(Debug, Clone, PartialEq)]
pub struct SharedModel {
    pub predictor: Predictor,
    pub report: TrainingReport,
    /// RMS per real dimension of the chosen predictor's validation residuals.
    pub residual_rms: f64,
}

impl SharedModel {
    /// Trains on the shared history and applies the persistence fallback.
    pub fn train(history: &[ChannelMatrix], cfg: &LinkConfig) -> Result<Self> {
        let trained = train(history, &cfg.rnn)?;
        let d = history[0].len() as f64;
        let report = trained.report.clone();
        let (predictor, eta) = if cfg.hold_fallback && report.validation_eta() >= report.hold_validation_eta() {
            (Predictor::Persistence, report.hold_validation_eta())
        } else {
            (trained.predictor(), report.validation_eta())
        };
        Ok(Self {
            predictor,
            report,
            residual_rms: (eta / (2.0 * d)).sqrt(),
        })
    }

    pub fn uses_fallback(&self) -> bool {
        !self.predictor.is_recurrent()
    }

    /// Residual clip range. Calibrated as `range_factor` standard deviations
    /// of the larger of the validation residual and the warm-up quantization
    /// noise.
    pub fn residual_range(&self, cfg: &LinkConfig) -> f64 {
        let floor = cfg.warmup_quantizer().step() / 12f64.sqrt();
        cfg.residual_range.resolve((cfg.range_factor * self.residual_rms.max(floor)).max(1e-9))
    }

    pub fn residual_quantizer(&self, cfg: &LinkConfig, resolution: Resolution) -> Result<QuantizerConfig> {
        match resolution {
            Resolution::Lossless => Ok(QuantizerConfig::lossless()),
            Resolution::Bits(b) => QuantizerConfig::new(b, self.residual_range(cfg)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Warmup,
    Operational,
}

/// One slot of a link trace.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotRecord {
    pub slot: usize,
    pub truth: ChannelMatrix,
    pub reconstruction: ChannelMatrix,
    pub bit_cost: u64,
}

/// The two ends of a twin-predictor link.
#[derive(Debug, Clone)]
pub struct TwinLink {
    config: LinkConfig,
    rows: usize,
    cols: usize,
    phase: Phase,
    shared_history: Vec<ChannelMatrix>,
    twins: Option<(PredictorState, PredictorState)>,
    quantizer: Option<QuantizerConfig>,
    slot: usize,
}

impl TwinLink {
    pub fn new(config: LinkConfig, rows: usize, cols: usize) -> Result<Self> {
        config.validate()?;
        if rows == 0 || cols == 0 {
            return Err(Error::Config("channel dimensions must be positive".into()));
        }
        Ok(Self {
            shared_history: Vec::with_capacity(config.warmup_slots),
            config,
            rows,
            cols,
            phase: Phase::Warmup,
            twins: None,
            quantizer: None,
            slot: 0,
        })
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn config(&self) -> &LinkConfig {
        &self.config
    }

    pub fn shared_history(&self) -> &[ChannelMatrix] {
        &self.shared_history
    }

    pub fn quantizer(&self) -> Option<&QuantizerConfig> {
        self.quantizer.as_ref()
    }

    pub fn warmup_complete(&self) -> bool {
        self.shared_history.len() >= self.config.warmup_slots
    }

    /// One warm-up slot of conventional feedback; the quantized CSI joins the
    /// shared history.
    pub fn warmup_step(&mut self, h: &ChannelMatrix) -> Result<SlotRecord> {
        if self.phase != Phase::Warmup {
            return Err(Error::Config("warm-up slot after the link became operational".into()));
        }
        self.check_dims(h)?;
        let (estimate, bit_cost) = conventional_feedback(h, &self.config.warmup_quantizer());
        self.shared_history.push(estimate.clone());
        let record = SlotRecord {
            slot: self.slot,
            truth: h.clone(),
            reconstruction: estimate,
            bit_cost,
        };
        self.slot += 1;
        Ok(record)
    }

    /// Trains the shared predictor on the warm-up history. With
    /// `verify_twin_training` the BS trains its own copy, and any difference
    /// from the MT copy is a desynchronization.
    pub fn train(&self) -> Result<SharedModel> {
        if !self.warmup_complete() {
            return Err(Error::InsufficientHistory {
                needed: self.config.warmup_slots,
                got: self.shared_history.len(),
            });
        }
        let mt = SharedModel::train(&self.shared_history, &self.config)?;
        if self.config.verify_twin_training {
            let bs = SharedModel::train(&self.shared_history, &self.config)?;
            if !bs.predictor.bit_eq(&mt.predictor) || bs.residual_rms.to_bits() != mt.residual_rms.to_bits() {
                return Err(Error::Desynchronized { slot: self.slot });
            }
        }
        Ok(mt)
    }

    /// Enters the operational phase with residual resolution `resolution`.
    pub fn activate(&mut self, model: &SharedModel, resolution: Resolution) -> Result<()> {
        if self.phase != Phase::Warmup {
            return Err(Error::Config("link is already operational".into()));
        }
        if !self.warmup_complete() {
            return Err(Error::InsufficientHistory {
                needed: self.config.warmup_slots,
                got: self.shared_history.len(),
            });
        }
        let quantizer = model.residual_quantizer(&self.config, resolution)?;
        let rnn = &self.config.rnn;
        let side = || -> Result<PredictorState> {
            let mut s = PredictorState::new(model.predictor.clone(), self.rows, self.cols, rnn.delay_taps, rnn.horizon)?;
            s.prime(&self.shared_history)?;
            s.predict()?;
            Ok(s)
        };
        let mt = side()?;
        let bs = side()?;
        self.twins = Some((mt, bs));
        self.quantizer = Some(quantizer);
        self.phase = Phase::Operational;
        Ok(())
    }

    /// Current twin predictions `(h̃_MT(t), h̃_BS(t))` for the next slot.
    pub fn predictions(&self) -> Option<(&ChannelMatrix, &ChannelMatrix)> {
        let (mt, bs) = self.twins.as_ref()?;
        Some((mt.current_prediction()?, bs.current_prediction()?))
    }

    /// Mutable access to `(MT, BS)` predictor states.
    pub fn states_mut(&mut self) -> Option<(&mut PredictorState, &mut PredictorState)> {
        self.twins.as_mut().map(|(a, b)| (a, b))
    }

    /// One operational slot with true channel `h`; the MT estimate is exact.
    pub fn step(&mut self, h: &ChannelMatrix) -> Result<SlotRecord> {
        self.check_dims(h)?;
        let slot = self.slot;
        let (Some((mt, bs)), Some(q)) = (self.twins.as_mut(), self.quantizer.as_ref()) else {
            return Err(Error::Config("link is not operational".into()));
        };
        let mt_pred = mt.current_prediction().ok_or(Error::NotReady { have: 0, need: 1 })?;
        let bs_pred = bs.current_prediction().ok_or(Error::NotReady { have: 0, need: 1 })?;
        if !mt_pred.bit_eq(bs_pred) {
            return Err(Error::Desynchronized { slot });
        }
        let msg = mt_report(h, mt_pred, q, slot)?;
        let mt_view = bs_reconstruct(mt_pred, &msg)?;
        let bs_view = bs_reconstruct(bs_pred, &msg)?;
        mt.ingest(mt_view)?;
        bs.ingest(bs_view.clone())?;
        mt.predict()?;
        bs.predict()?;
        self.slot += 1;
        Ok(SlotRecord {
            slot,
            truth: h.clone(),
            reconstruction: bs_view,
            bit_cost: msg.bit_cost,
        })
    }

    fn check_dims(&self, h: &ChannelMatrix) -> Result<()> {
        if h.dims() != (self.rows, self.cols) {
            return Err(Error::Dimension {
                expected: self.rows * self.cols,
                actual: h.len(),
            });
        }
        Ok(())
    }
}

/// Operational-phase trace of one link.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkTrace {
    pub scheme: Scheme,
    pub resolution: Resolution,
    pub records: Vec<SlotRecord>,
}

impl LinkTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn total_bits(&self) -> u64 {
        self.records.iter().map(|r| r.bit_cost).sum()
    }

    /// CSV with one row per slot: slot, scheme, true re/im per entry,
    /// reconstructed re/im per entry, bit cost.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let Some(first) = self.records.first() else {
            return writeln!(out, "slot,scheme,bit_cost");
        };
        let (rows, cols) = first.truth.dims();
        let mut header = String::from("slot,scheme");
        for prefix in ["true", "rec"] {
            for r in 1..=rows {
                for c in 1..=cols {
                    header.push_str(&format!(",{prefix}_re_{r}_{c},{prefix}_im_{r}_{c}"));
                }
            }
        }
        writeln!(out, "{header},bit_cost")?;
        for rec in &self.records {
            write!(out, "{},{}", rec.slot, self.scheme)?;
            for z in rec.truth.entries().iter().chain(rec.reconstruction.entries()) {
                write!(out, ",{:?},{:?}", z.re, z.im)?;
            }
            writeln!(out, ",{}", rec.bit_cost)?;
        }
        Ok(())
    }
}

/// Conventional feedback over `channel`.
pub fn run_conventional(channel: &[ChannelMatrix], cfg: &LinkConfig, resolution: Resolution) -> Result<LinkTrace> {
    let q = cfg.csi_quantizer(resolution)?;
    let records = channel
        .iter()
        .map(|h| {
            let (reconstruction, bit_cost) = conventional_feedback(h, &q);
            SlotRecord {
                slot: h.slot,
                truth: h.clone(),
                reconstruction,
                bit_cost,
            }
        })
        .collect();
    Ok(LinkTrace {
        scheme: Scheme::Conventional,
        resolution,
        records,
    })
}

/// Runs a twin link through its warm-up on the head of `channel`.
pub fn warm_up(channel: &[ChannelMatrix], cfg: &LinkConfig) -> Result<TwinLink> {
    let first = channel.first().ok_or(Error::Empty("channel sequence"))?;
    let (rows, cols) = first.dims();
    let mut link = TwinLink::new(cfg.clone(), rows, cols)?;
    if channel.len() <= cfg.warmup_slots {
        return Err(Error::InsufficientHistory {
            needed: cfg.warmup_slots + 1,
            got: channel.len(),
        });
    }
    for h in &channel[..cfg.warmup_slots] {
        link.warmup_step(h)?;
    }
    Ok(link)
}

/// Operational phase of an already warmed-up link over `channel`.
pub fn run_operational(mut link: TwinLink, model: &SharedModel, channel: &[ChannelMatrix], resolution: Resolution) -> Result<LinkTrace> {
    link.activate(model, resolution)?;
    let records = channel.iter().map(|h| link.step(h)).collect::<Result<Vec<_>>>()?;
    Ok(LinkTrace {
        scheme: Scheme::Proposed,
        resolution,
        records,
    })
}

/// Full link over `channel`: the first `warmup_slots` slots build the shared
/// history, and the trace covers the remaining operational slots.
pub fn run_link(channel: &[ChannelMatrix], cfg: &LinkConfig, resolution: Resolution, scheme: Scheme) -> Result<LinkTrace> {
    cfg.validate()?;
    if channel.len() <= cfg.warmup_slots {
        return Err(Error::InsufficientHistory {
            needed: cfg.warmup_slots + 1,
            got: channel.len(),
        });
    }
    let operational = &channel[cfg.warmup_slots..];
    match scheme {
        Scheme::Conventional => run_conventional(operational, cfg, resolution),
        Scheme::Proposed => {
            let link = warm_up(channel, cfg)?;
            let model = link.train()?;
            run_operational(link, &model, operational, resolution)
        }
    }
}
