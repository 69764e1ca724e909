use nalgebra::{DMatrix, SymmetricEigen};

use super::acf;
use crate::error::{Error, Result};

/// Largest accepted condition number of the Toeplitz autocorrelation matrix.
pub const MAX_CONDITION: f64 = 1e13;

/// Solution of the order-`u` Yule-Walker system for a Jakes ACF.
#[derive(Debug, Clone, PartialEq)]
pub struct YuleWalker {
    /// `φ_1 … φ_u`.
    pub coeffs: Vec<f64>,
    /// Innovation variance giving unit stationary variance.
    pub innovation_variance: f64,
    /// Condition number of the Toeplitz matrix that was solved.
    pub condition: f64,
}

/// Fits AR(`order`) coefficients to `R[n] = J0(2π f_m |n|)`.
///
/// Solves `R c = r` by Levinson-Durbin recursion and sets
/// `σ² = R[0] − Σ φ_i R[i]`.
pub fn solve_yule_walker(order: usize, fm: f64) -> Result<YuleWalker> {
    if order == 0 {
        return Err(Error::Config("AR order must be at least 1".into()));
    }
    if !(fm.is_finite() && fm >= 0.0) {
        return Err(Error::Config(format!("normalized Doppler must be finite and nonnegative, got {fm}")));
    }
    let r: Vec<f64> = (0..=order as i64).map(|n| acf(n, fm)).collect();

    let condition = toeplitz_condition(&r[..order]);
    if condition.is_nan() || condition > MAX_CONDITION {
        return Err(Error::IllConditioned { fm, order, condition });
    }

    let coeffs = levinson_durbin(&r, order).ok_or(Error::IllConditioned { fm, order, condition })?;
    let explained: f64 = coeffs.iter().zip(&r[1..]).map(|(c, rn)| c * rn).sum();
    let mut innovation_variance = r[0] - explained;
    if innovation_variance < 0.0 {
        // Rounding on nearly deterministic fits only.
        if innovation_variance < -1e-12 {
            return Err(Error::IllConditioned { fm, order, condition });
        }
        innovation_variance = 0.0;
    }
    Ok(YuleWalker {
        coeffs,
        innovation_variance,
        condition,
    })
}

/// Levinson-Durbin recursion for a symmetric Toeplitz system built from
/// autocorrelations `r[0..=order]`. `None` if the prediction error collapses
/// before the last stage.
fn levinson_durbin(r: &[f64], order: usize) -> Option<Vec<f64>> {
    let mut a = vec![0.0; order];
    let mut error = r[0];
    for m in 0..order {
        if error <= 0.0 {
            return None;
        }
        let acc: f64 = r[m + 1] - (0..m).map(|i| a[i] * r[m - i]).sum::<f64>();
        let k = acc / error;
        let prev = a.clone();
        a[m] = k;
        for i in 0..m {
            a[i] = prev[i] - k * prev[m - 1 - i];
        }
        error *= 1.0 - k * k;
    }
    Some(a)
}

fn toeplitz(r: &[f64]) -> DMatrix<f64> {
    let n = r.len();
    DMatrix::from_fn(n, n, |i, j| r[i.abs_diff(j)])
}

fn toeplitz_condition(r: &[f64]) -> f64 {
    let eig = SymmetricEigen::new(toeplitz(r)).eigenvalues;
    let max = eig.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let min = eig.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// `‖R c − r‖₂` for the Yule-Walker system of `coeffs` at `fm`.
pub fn toeplitz_residual(coeffs: &[f64], fm: f64) -> f64 {
    let u = coeffs.len();
    let r: Vec<f64> = (0..=u as i64).map(|n| acf(n, fm)).collect();
    (0..u)
        .map(|i| {
            let lhs: f64 = (0..u).map(|j| r[i.abs_diff(j)] * coeffs[j]).sum();
            (lhs - r[i + 1]).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}
