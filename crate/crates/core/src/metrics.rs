//! Recovery MSE, matched-filter precoding SNR and feedback overhead.

use num_complex::Complex64;

use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::protocol::{LinkTrace, Scheme};
use crate::quant::Resolution;

/// Reported value for a zero mean precoding ratio.
pub const SNR_FLOOR_DB: f64 = -100.0;

/// `(1/T)·Σ_t ‖H(t) − Ĥ_BS(t)‖²`.
pub fn recovery_mse(trace: &LinkTrace) -> Result<f64> {
    if trace.is_empty() {
        return Err(Error::Empty("link trace"));
    }
    let mut total = 0.0;
    for r in &trace.records {
        total += r.truth.distance_sqr(&r.reconstruction)?;
    }
    Ok(total / trace.len() as f64)
}

/// Unit-norm matched filter `w = ĥᴴ / ‖ĥ‖` for a single-receive-antenna
/// channel row.
pub fn mf_precoder(h_est: &ChannelMatrix) -> Result<Vec<Complex64>> {
    if h_est.rows() != 1 {
        return Err(Error::Unsupported(format!(
            "matched-filter precoding needs one receive antenna, got {}",
            h_est.rows()
        )));
    }
    let norm = h_est.norm_sqr().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroNorm);
    }
    Ok(h_est.entries().iter().map(|z| z.conj() / norm).collect())
}

/// `|H·w|²`.
pub fn beamforming_gain(h: &ChannelMatrix, w: &[Complex64]) -> f64 {
    h.entries().iter().zip(w).map(|(a, b)| a * b).sum::<Complex64>().norm_sqr()
}

/// `ρ = |H·w_est|² / |H·w_perfect|²`; `None` for an all-zero channel. A
/// zero estimate gives `ρ = 0`.
pub fn precoding_ratio(h: &ChannelMatrix, h_est: &ChannelMatrix) -> Result<Option<f64>> {
    h.check_same_dims(h_est)?;
    let best = h.norm_sqr();
    if best == 0.0 {
        return Ok(None);
    }
    match mf_precoder(h_est) {
        Ok(w) => Ok(Some((beamforming_gain(h, &w) / best).min(1.0))),
        Err(Error::ZeroNorm) => Ok(Some(0.0)),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrSummary {
    /// `Γ_P = 10·log₁₀(mean ρ)`, relative to perfect-CSI precoding.
    pub db: f64,
    pub mean_ratio: f64,
    /// Slots skipped because the true channel was zero.
    pub skipped: usize,
}

/// Precoding SNR relative to perfect-CSI matched filtering. `noise_power`
/// cancels in the ratio and is only validated.
pub fn precoding_snr(trace: &LinkTrace, noise_power: f64) -> Result<SnrSummary> {
    if trace.is_empty() {
        return Err(Error::Empty("link trace"));
    }
    if !(noise_power.is_finite() && noise_power > 0.0) {
        return Err(Error::Config(format!("noise power must be positive, got {noise_power}")));
    }
    let mut sum = 0.0;
    let mut used = 0usize;
    for r in &trace.records {
        if let Some(rho) = precoding_ratio(&r.truth, &r.reconstruction)? {
            sum += rho;
            used += 1;
        }
    }
    let skipped = trace.len() - used;
    let mean_ratio = if used == 0 { 0.0 } else { sum / used as f64 };
    Ok(SnrSummary {
        db: ratio_to_db(mean_ratio),
        mean_ratio,
        skipped,
    })
}

pub fn ratio_to_db(ratio: f64) -> f64 {
    if ratio > 0.0 {
        (10.0 * ratio.log10()).max(SNR_FLOOR_DB)
    } else {
        SNR_FLOOR_DB
    }
}

/// Mean feedback bits per slot.
pub fn overhead(trace: &LinkTrace) -> f64 {
    if trace.is_empty() {
        return 0.0;
    }
    trace.total_bits() as f64 / trace.len() as f64
}

/// Metrics of one (trial, bits, scheme) run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub scheme: Scheme,
    pub resolution: Resolution,
    pub trial: usize,
    pub seed: u64,
    pub mse: f64,
    pub snr_db: f64,
    pub avg_bits_per_slot: f64,
    pub slots: usize,
}

impl RunResult {
    pub fn from_trace(trace: &LinkTrace, trial: usize, seed: u64) -> Result<Self> {
        Ok(Self {
            scheme: trace.scheme,
            resolution: trace.resolution,
            trial,
            seed,
            mse: recovery_mse(trace)?,
            snr_db: precoding_snr(trace, 1.0)?.db,
            avg_bits_per_slot: overhead(trace),
            slots: trace.len(),
        })
    }
}

/// Mean and standard error over trials for one (scheme, bits) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateResult {
    pub scheme: Scheme,
    pub resolution: Resolution,
    pub trials: usize,
    pub mse_mean: f64,
    pub mse_stderr: f64,
    pub snr_db_mean: f64,
    pub snr_db_stderr: f64,
    pub bits_per_slot_mean: f64,
}

/// Sample mean and standard error of the mean (zero for one value).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Groups per-trial results by (bits, scheme), in that sort order.
pub fn aggregate(results: &[RunResult]) -> Vec<AggregateResult> {
    let mut keys: Vec<(Resolution, Scheme)> = results.iter().map(|r| (r.resolution, r.scheme)).collect();
    keys.sort_by_key(|(res, scheme)| (resolution_key(*res), *scheme));
    keys.dedup();
    keys.into_iter()
        .map(|(resolution, scheme)| {
            let cell: Vec<&RunResult> = results.iter().filter(|r| r.resolution == resolution && r.scheme == scheme).collect();
            let col = |f: fn(&RunResult) -> f64| cell.iter().map(|r| f(r)).collect::<Vec<_>>();
            let (mse_mean, mse_stderr) = mean_stderr(&col(|r| r.mse));
            let (snr_db_mean, snr_db_stderr) = mean_stderr(&col(|r| r.snr_db));
            let (bits_per_slot_mean, _) = mean_stderr(&col(|r| r.avg_bits_per_slot));
            AggregateResult {
                scheme,
                resolution,
                trials: cell.len(),
                mse_mean,
                mse_stderr,
                snr_db_mean,
                snr_db_stderr,
                bits_per_slot_mean,
            }
        })
        .collect()
}

fn resolution_key(r: Resolution) -> u32 {
    match r {
        Resolution::Bits(b) => b,
        Resolution::Lossless => u32::MAX,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::SlotRecord;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn trace(pairs: &[(ChannelMatrix, ChannelMatrix)], bits: u64) -> LinkTrace {
        LinkTrace {
            scheme: Scheme::Conventional,
            resolution: Resolution::Bits(2),
            records: pairs
                .iter()
                .enumerate()
                .map(|(slot, (t, r))| SlotRecord {
                    slot,
                    truth: t.clone(),
                    reconstruction: r.clone(),
                    bit_cost: bits,
                })
                .collect(),
        }
    }

    fn m(v: &[Complex64]) -> ChannelMatrix {
        ChannelMatrix::from_entries(1, v.len(), v.to_vec()).unwrap()
    }

    #[test]
    fn mse_examples() {
        let t = trace(&[(m(&[c(1.0, 0.0)]), m(&[c(0.8, 0.0)]))], 4);
        assert!((recovery_mse(&t).unwrap() - 0.04).abs() < 1e-15);
        let h = m(&[c(0.3, 0.1), c(-1.0, 2.0)]);
        assert_eq!(recovery_mse(&trace(&[(h.clone(), h)], 8)).unwrap(), 0.0);
        assert!(recovery_mse(&trace(&[], 0)).is_err());
    }

    #[test]
    fn precoder_examples() {
        assert_eq!(mf_precoder(&m(&[c(1.0, 0.0), c(0.0, 0.0)])).unwrap(), vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let w = mf_precoder(&m(&[c(1.0, 0.0), c(1.0, 0.0)])).unwrap();
        assert!((w[0].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(matches!(mf_precoder(&ChannelMatrix::zeros(1, 2)), Err(Error::ZeroNorm)));
        assert!(mf_precoder(&ChannelMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn snr_examples() {
        let h = m(&[c(0.3, -0.2), c(1.0, 0.5)]);
        let perfect = trace(&[(h.clone(), h.clone())], 8);
        assert!(precoding_snr(&perfect, 1.0).unwrap().db.abs() < 1e-12);
        // Estimate orthogonal to Hᴴ.
        let h = m(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let orth = m(&[c(0.0, 0.0), c(1.0, 0.0)]);
        let s = precoding_snr(&trace(&[(h, orth)], 8), 1.0).unwrap();
        assert_eq!(s.db, SNR_FLOOR_DB);
        let zero = precoding_snr(&trace(&[(ChannelMatrix::zeros(1, 2), orth_like())], 8), 1.0).unwrap();
        assert_eq!(zero.skipped, 1);
    }

    fn orth_like() -> ChannelMatrix {
        m(&[c(0.0, 1.0), c(0.0, 0.0)])
    }

    #[test]
    fn overhead_and_aggregation() {
        let h = m(&[c(1.0, 0.0), c(0.0, 1.0)]);
        let t = trace(&[(h.clone(), h.clone()), (h.clone(), h)], 8);
        assert_eq!(overhead(&t), 8.0);
        let (mean, se) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(mean, 2.5);
        assert!((se - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        let r = RunResult::from_trace(&t, 0, 1).unwrap();
        let mut other = r.clone();
        other.scheme = Scheme::Proposed;
        other.resolution = Resolution::Bits(1);
        let agg = aggregate(&[r.clone(), other, r]);
        assert_eq!(agg.len(), 2);
        assert_eq!(agg[0].resolution, Resolution::Bits(1));
        assert_eq!(agg[1].trials, 2);
        assert_eq!(agg[1].mse_stderr, 0.0);
    }
}
