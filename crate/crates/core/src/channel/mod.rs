//! Time-correlated flat-fading MIMO channels.
//!
//! The per-subchannel autocorrelation follows the isotropic-scattering
//! (Jakes) model `R[n] = J0(2π f_m |n|)`. An AR(u) process fitted to that ACF
//! through the Yule-Walker equations generates the sequence slot by slot.

mod ar;
mod bessel;
mod yule_walker;

use std::io::Write;
use std::ops::{Add, Index, IndexMut, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use ar::{generate_sequence, ArModel};
pub use bessel::bessel_j0;
pub use yule_walker::{solve_yule_walker, toeplitz_residual, YuleWalker, MAX_CONDITION};

/// Doppler geometry of the fading process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DopplerParams {
    /// Terminal speed in m/s.
    pub carrier_speed: f64,
    /// Carrier wavelength in m.
    pub wavelength: f64,
    /// Slot duration in s.
    pub sample_period: f64,
}

impl DopplerParams {
    pub fn new(carrier_speed: f64, wavelength: f64, sample_period: f64) -> Result<Self> {
        let params = Self {
            carrier_speed,
            wavelength,
            sample_period,
        };
        let fm = params.normalized_doppler();
        if !(carrier_speed >= 0.0 && wavelength > 0.0 && sample_period > 0.0) || !fm.is_finite() {
            return Err(Error::Config(format!(
                "Doppler parameters must be nonnegative speed and positive wavelength/period, got {params:?}"
            )));
        }
        if fm >= 0.5 {
            return Err(Error::Config(format!(
                "normalized Doppler {fm} must stay below 0.5 (fading sampled above Nyquist)"
            )));
        }
        Ok(params)
    }

    /// Maximum Doppler shift `f_d = speed / wavelength` in Hz.
    pub fn max_doppler_hz(&self) -> f64 {
        self.carrier_speed / self.wavelength
    }

    /// `f_m = f_d · T_s`.
    pub fn normalized_doppler(&self) -> f64 {
        self.max_doppler_hz() * self.sample_period
    }
}

/// Normalized autocorrelation of one subchannel at integer `lag`.
pub fn acf(lag: i64, fm: f64) -> f64 {
    bessel_j0(2.0 * std::f64::consts::PI * fm * lag.unsigned_abs() as f64)
}

/// One `N_r × N_t` channel realization, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
    /// Slot index this realization belongs to.
    pub slot: usize,
}

impl ChannelMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Complex64::new(0.0, 0.0); rows * cols],
            slot: 0,
        }
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension {
                expected: rows * cols,
                actual: entries.len(),
            });
        }
        Ok(Self {
            rows,
            cols,
            entries,
            slot: 0,
        })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::Dimension {
                    expected: cols,
                    actual: row.len(),
                });
            }
            entries.extend_from_slice(row);
        }
        Self::from_entries(rows.len(), cols, entries)
    }

    pub fn with_slot(mut self, slot: usize) -> Self {
        self.slot = slot;
        self
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in row-major order: `h_11, h_12, …, h_{N_r N_t}`.
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [Complex64] {
        &mut self.entries
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&z| f(z)).collect(),
            slot: self.slot,
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        self.check_same_dims(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            slot: self.slot,
        })
    }

    pub fn check_same_dims(&self, other: &Self) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::Dimension {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(())
    }

    /// Squared Frobenius norm.
    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(Complex64::norm_sqr).sum()
    }

    /// Squared Frobenius distance to `other`.
    pub fn distance_sqr(&self, other: &Self) -> Result<f64> {
        self.check_same_dims(other)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum())
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Bitwise equality of every real and imaginary component.
    pub fn bit_eq(&self, other: &Self) -> bool {
        self.dims() == other.dims()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits())
    }
}

impl Index<(usize, usize)> for ChannelMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of bounds");
        &self.entries[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ChannelMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of bounds");
        &mut self.entries[r * self.cols + c]
    }
}

impl Sub for &ChannelMatrix {
    type Output = ChannelMatrix;

    fn sub(self, rhs: &ChannelMatrix) -> ChannelMatrix {
        self.zip_map(rhs, |a, b| a - b).expect("matrix dimensions differ")
    }
}

impl Add for &ChannelMatrix {
    type Output = ChannelMatrix;

    fn add(self, rhs: &ChannelMatrix) -> ChannelMatrix {
        self.zip_map(rhs, |a, b| a + b).expect("matrix dimensions differ")
    }
}

/// Writes `slot,n_r,n_t,re,im` rows (antenna indices are 1-based).
pub fn write_sequence_csv<W: Write>(sequence: &[ChannelMatrix], mut out: W) -> std::io::Result<()> {
    writeln!(out, "slot,n_r,n_t,re,im")?;
    for h in sequence {
        for r in 0..h.rows() {
            for c in 0..h.cols() {
                let z = h[(r, c)];
                writeln!(out, "{},{},{},{},{}", h.slot, r + 1, c + 1, z.re, z.im)?;
            }
        }
    }
    Ok(())
}

/// Normalized sample autocorrelation of one subchannel,
/// `Re Σ h(t) h*(t+lag) / Σ |h(t)|^2`.
pub fn sample_autocorrelation(sequence: &[ChannelMatrix], entry: usize, lag: usize) -> f64 {
    let values: Vec<Complex64> = sequence.iter().map(|h| h.entries()[entry]).collect();
    let power: f64 = values.iter().map(Complex64::norm_sqr).sum();
    if lag >= values.len() || power == 0.0 {
        return 0.0;
    }
    let cross: f64 = values
        .iter()
        .zip(&values[lag..])
        .map(|(a, b)| (a * b.conj()).re)
        .sum();
    cross / power
}
