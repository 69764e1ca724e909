use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::{acf, solve_yule_walker, ChannelMatrix};
use crate::error::{Error, Result};
use crate::rng::{complex_normal, seeded, SimRng};

/// Extra slots simulated and discarded after the initial draw, per AR order.
const WARMUP_PER_ORDER: usize = 10;

/// AR(u) evolution `H(t) = Σ C_i ⊙ H(t-i) + ω(t)` for an `N_r × N_t` channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ArModel {
    rows: usize,
    cols: usize,
    /// `coeffs[i]` is `C_{i+1}` in row-major order.
    coeffs: Vec<Vec<f64>>,
    /// Per-subchannel innovation variance `σ_u²`.
    innovation_variance: Vec<f64>,
    /// Per-subchannel stationary autocovariance at lags `0..u`.
    stationary: Vec<Vec<f64>>,
}

impl ArModel {
    /// AR(`order`) fit of the Jakes ACF at normalized Doppler `fm`, identical
    /// for every subchannel and normalized to unit power.
    pub fn jakes(order: usize, fm: f64, rows: usize, cols: usize) -> Result<Self> {
        check_dims(rows, cols)?;
        if fm >= 0.5 {
            return Err(Error::Config(format!("normalized Doppler {fm} must be below 0.5")));
        }
        let yw = solve_yule_walker(order, fm)?;
        let n = rows * cols;
        let lags: Vec<f64> = (0..order as i64).map(|lag| acf(lag, fm)).collect();
        let model = Self {
            rows,
            cols,
            coeffs: yw.coeffs.iter().map(|&c| vec![c; n]).collect(),
            innovation_variance: vec![yw.innovation_variance; n],
            stationary: vec![lags; n],
        };
        model.check_stable()?;
        Ok(model)
    }

    /// Model with explicit per-subchannel coefficient matrices.
    pub fn new(coeffs: Vec<Vec<f64>>, innovation_variance: Vec<f64>, rows: usize, cols: usize) -> Result<Self> {
        check_dims(rows, cols)?;
        let n = rows * cols;
        if coeffs.is_empty() {
            return Err(Error::Config("AR order must be at least 1".into()));
        }
        for c in &coeffs {
            if c.len() != n {
                return Err(Error::Dimension { expected: n, actual: c.len() });
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config("AR coefficients must be finite".into()));
            }
        }
        if innovation_variance.len() != n {
            return Err(Error::Dimension {
                expected: n,
                actual: innovation_variance.len(),
            });
        }
        if innovation_variance.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Config("innovation variance must be finite and nonnegative".into()));
        }
        let mut model = Self {
            rows,
            cols,
            coeffs,
            innovation_variance,
            stationary: Vec::new(),
        };
        model.check_stable()?;
        model.stationary = (0..n)
            .map(|e| stationary_autocovariance(&model.entry_coeffs(e), model.innovation_variance[e]))
            .collect::<Result<_>>()?;
        Ok(model)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Coefficient matrix `C_i` for `i` in `1..=u`, row-major.
    pub fn coefficient_matrix(&self, i: usize) -> &[f64] {
        &self.coeffs[i - 1]
    }

    pub fn innovation_variance(&self) -> &[f64] {
        &self.innovation_variance
    }

    /// `φ_1 … φ_u` of one subchannel.
    pub fn entry_coeffs(&self, entry: usize) -> Vec<f64> {
        self.coeffs.iter().map(|c| c[entry]).collect()
    }

    fn check_stable(&self) -> Result<()> {
        for entry in 0..self.rows * self.cols {
            let phi = self.entry_coeffs(entry);
            let sigma2 = self.innovation_variance[entry];
            if phi.len() == 1 {
                let a = phi[0].abs();
                // |φ| = 1 without innovation is a frozen channel, not a random walk.
                if a > 1.0 || (a == 1.0 && sigma2 > 0.0) {
                    return Err(Error::UnstableModel(format!(
                        "subchannel {entry}: |φ_1| = {a} with σ² = {sigma2}"
                    )));
                }
            } else if let Some(k) = reflection_coefficients(&phi).iter().find(|k| k.abs() >= 1.0) {
                return Err(Error::UnstableModel(format!(
                    "subchannel {entry}: reflection coefficient {k} outside the unit interval"
                )));
            }
        }
        Ok(())
    }

    /// Infinite stream of channel realizations for `seed`.
    pub fn generator(&self, seed: u64) -> ChannelGenerator<'_> {
        ChannelGenerator::new(self, seed)
    }
}

fn check_dims(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::Config(format!("channel dimensions must be positive, got {rows}x{cols}")));
    }
    Ok(())
}

/// Step-down recursion from direct-form AR coefficients to reflection
/// coefficients; the model is stationary iff all of them lie in (-1, 1).
fn reflection_coefficients(phi: &[f64]) -> Vec<f64> {
    let mut a = phi.to_vec();
    let mut ks = vec![0.0; a.len()];
    for m in (0..a.len()).rev() {
        let k = a[m];
        ks[m] = k;
        if k.abs() >= 1.0 {
            break;
        }
        let denom = 1.0 - k * k;
        let prev = a.clone();
        for i in 0..m {
            a[i] = (prev[i] + k * prev[m - 1 - i]) / denom;
        }
    }
    ks
}

/// Autocovariance `γ(0..u)` of a stationary AR process, from
/// `γ(n) − Σ φ_i γ(|n−i|) = σ² δ_n`, `n = 0..=u`.
fn stationary_autocovariance(phi: &[f64], sigma2: f64) -> Result<Vec<f64>> {
    let u = phi.len();
    if u == 1 && phi[0].abs() == 1.0 {
        return Ok(vec![1.0]);
    }
    let mut a = DMatrix::<f64>::zeros(u + 1, u + 1);
    for n in 0..=u {
        a[(n, n)] += 1.0;
        for (i, &p) in phi.iter().enumerate() {
            a[(n, n.abs_diff(i + 1))] -= p;
        }
    }
    let mut b = DVector::<f64>::zeros(u + 1);
    b[0] = sigma2;
    let gamma = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::UnstableModel("stationary covariance system is singular".into()))?;
    Ok(gamma.iter().take(u).copied().collect())
}

/// Square root `L` with `L Lᵀ = Toeplitz(γ)`, via eigendecomposition so that
/// nearly singular covariances still factor.
fn covariance_root(gamma: &[f64]) -> DMatrix<f64> {
    let n = gamma.len();
    let cov = DMatrix::from_fn(n, n, |i, j| gamma[i.abs_diff(j)]);
    let eig = SymmetricEigen::new(cov);
    let scale = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()));
    &eig.eigenvectors * scale
}

/// Streaming AR channel generator; see [`ArModel::generator`].
pub struct ChannelGenerator<'a> {
    model: &'a ArModel,
    rng: SimRng,
    /// Most recent realization first.
    history: VecDeque<ChannelMatrix>,
    slot: usize,
}

impl<'a> ChannelGenerator<'a> {
    fn new(model: &'a ArModel, seed: u64) -> Self {
        let mut rng = seeded(seed);
        let u = model.order();
        let n = model.rows * model.cols;

        // Joint stationary draw of the first u realizations per subchannel.
        let mut initial = vec![ChannelMatrix::zeros(model.rows, model.cols); u];
        for e in 0..n {
            let root = covariance_root(&model.stationary[e]);
            let w: Vec<Complex64> = (0..u).map(|_| complex_normal(&mut rng, 1.0)).collect();
            for (i, slot) in initial.iter_mut().enumerate() {
                let z: Complex64 = (0..u).map(|j| w[j] * root[(i, j)]).sum();
                slot.entries_mut()[e] = z;
            }
        }
        let mut generator = Self {
            model,
            rng,
            history: initial.into_iter().collect(),
            slot: 0,
        };
        for _ in 0..WARMUP_PER_ORDER * u {
            generator.advance();
        }
        generator
    }

    fn advance(&mut self) -> ChannelMatrix {
        let model = self.model;
        let mut next = ChannelMatrix::zeros(model.rows, model.cols);
        for (e, value) in next.entries_mut().iter_mut().enumerate() {
            let mut z = complex_normal(&mut self.rng, model.innovation_variance[e]);
            for (i, past) in self.history.iter().enumerate() {
                z += past.entries()[e] * model.coeffs[i][e];
            }
            *value = z;
        }
        self.history.pop_back();
        self.history.push_front(next.clone());
        next
    }
}

impl Iterator for ChannelGenerator<'_> {
    type Item = ChannelMatrix;

    fn next(&mut self) -> Option<ChannelMatrix> {
        let h = self.advance().with_slot(self.slot);
        self.slot += 1;
        Some(h)
    }
}

/// `length` consecutive realizations, slots `0..length`. Bit-identical for
/// identical `(model, length, seed)`.
pub fn generate_sequence(model: &ArModel, length: usize, seed: u64) -> Result<Vec<ChannelMatrix>> {
    if length == 0 {
        return Err(Error::Config("sequence length must be at least 1".into()));
    }
    Ok(model.generator(seed).take(length).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn memoryless_limit_is_white() {
        let model = ArModel::new(vec![vec![0.0; 2]], vec![1.0; 2], 1, 2).unwrap();
        let seq = generate_sequence(&model, 50_000, 3).unwrap();
        let power = seq.iter().map(|h| h.entries()[1].norm_sqr()).sum::<f64>() / seq.len() as f64;
        assert_abs_diff_eq!(power, 1.0, epsilon = 0.03);
        assert!(crate::channel::sample_autocorrelation(&seq, 1, 1).abs() < 0.02);
    }

    #[test]
    fn deterministic_per_seed() {
        let model = ArModel::jakes(2, 0.02, 2, 2).unwrap();
        let a = generate_sequence(&model, 300, 11).unwrap();
        let b = generate_sequence(&model, 300, 11).unwrap();
        let c = generate_sequence(&model, 300, 12).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x.bit_eq(y)));
        assert!(!a.iter().zip(&c).all(|(x, y)| x.bit_eq(y)));
        assert_eq!(a[0].slot, 0);
        assert_eq!(a[299].slot, 299);
    }

    #[test]
    fn unstable_first_order_rejected() {
        let err = ArModel::new(vec![vec![1.01, 0.5]], vec![1.0, 1.0], 1, 2).unwrap_err();
        assert!(matches!(err, Error::UnstableModel(_)));
        let err = ArModel::new(vec![vec![1.0]], vec![0.1], 1, 1).unwrap_err();
        assert!(matches!(err, Error::UnstableModel(_)));
    }

    #[test]
    fn unstable_higher_order_rejected() {
        // Poles at 1.25 and 0.5.
        let err = ArModel::new(vec![vec![1.75], vec![-0.625]], vec![1.0], 1, 1).unwrap_err();
        assert!(matches!(err, Error::UnstableModel(_)));
        assert!(ArModel::new(vec![vec![1.2], vec![-0.5]], vec![1.0], 1, 1).is_ok());
    }

    #[test]
    fn frozen_channel_never_moves() {
        let model = ArModel::jakes(1, 0.0, 1, 2).unwrap();
        let seq = generate_sequence(&model, 100, 5).unwrap();
        assert!(seq.iter().all(|h| h.entries() == seq[0].entries()));
        assert!(seq[0].norm_sqr() > 0.0);
    }

    #[test]
    fn stationary_covariance_first_order() {
        let gamma = stationary_autocovariance(&[0.5], 0.75).unwrap();
        assert_abs_diff_eq!(gamma[0], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn stationary_covariance_matches_jakes_fit() {
        let fm = 0.05;
        let yw = solve_yule_walker(3, fm).unwrap();
        let gamma = stationary_autocovariance(&yw.coeffs, yw.innovation_variance).unwrap();
        for (lag, g) in gamma.iter().enumerate() {
            assert_abs_diff_eq!(*g, acf(lag as i64, fm), epsilon = 1e-8);
        }
    }

    #[test]
    fn zero_length_rejected() {
        let model = ArModel::jakes(1, 0.01, 1, 1).unwrap();
        assert!(generate_sequence(&model, 0, 1).is_err());
    }
}
