//! Element-wise uniform mid-rise scalar quantization.
//!
//! A `b`-bit quantizer over `[-r, r]` has `2^b` reconstruction levels
//! `±(m + ½)Δ`, `Δ = 2r / 2^b`. There is no zero level. Inputs on a decision
//! boundary (including 0) round toward +∞ and inputs beyond `±r` saturate at
//! the outermost level. Complex values are quantized per real component.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};

/// Largest supported bit depth (levels must stay exactly representable).
pub const MAX_BITS: u32 = 52;

/// Bits charged per real component when the quantizer is lossless.
pub const LOSSLESS_BITS: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Resolution {
    Bits(u32),
    /// Identity map, the infinite-resolution limit.
    Lossless,
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Resolution::Bits(b) => write!(f, "{b}"),
            Resolution::Lossless => f.write_str("lossless"),
        }
    }
}

impl FromStr for Resolution {
    type Err = Error;

    /// A bit count, or `lossless`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("lossless") {
            return Ok(Resolution::Lossless);
        }
        let b: u32 = s.parse().map_err(|_| Error::Config(format!("bad bit depth `{s}`")))?;
        if b == 0 || b > MAX_BITS {
            return Err(Error::Config(format!("bit depth must be in 1..={MAX_BITS}, got {b}")));
        }
        Ok(Resolution::Bits(b))
    }
}

/// How a clip range is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ClipRange {
    /// Calibrated from signal statistics.
    #[default]
    Auto,
    Fixed(f64),
}

impl ClipRange {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ClipRange::Fixed(r) if !(r.is_finite() && r > 0.0) => Err(Error::Config(format!("clip range must be positive, got {r}"))),
            _ => Ok(()),
        }
    }

    /// The fixed value, or `auto` when unset.
    pub fn resolve(&self, auto: f64) -> f64 {
        match *self {
            ClipRange::Auto => auto,
            ClipRange::Fixed(r) => r,
        }
    }
}

impl FromStr for ClipRange {
    type Err = Error;

    /// A positive number, or `auto`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(ClipRange::Auto);
        }
        let r: f64 = s.parse().map_err(|_| Error::Config(format!("bad clip range `{s}`")))?;
        let range = ClipRange::Fixed(r);
        range.validate()?;
        Ok(range)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizerConfig {
    pub resolution: Resolution,
    /// Half-width `r` of the covered interval per real dimension.
    pub clip_range: f64,
}

impl QuantizerConfig {
    pub fn new(bits: u32, clip_range: f64) -> Result<Self> {
        let cfg = Self {
            resolution: Resolution::Bits(bits),
            clip_range,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn lossless() -> Self {
        Self {
            resolution: Resolution::Lossless,
            clip_range: f64::INFINITY,
        }
    }

    /// Clip range of three standard deviations of one real component of a
    /// circularly-symmetric complex input with total `variance`.
    pub fn three_sigma(bits: u32, variance: f64) -> Result<Self> {
        Self::new(bits, 3.0 * (0.5 * variance).sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        match self.resolution {
            Resolution::Lossless => Ok(()),
            Resolution::Bits(b) => {
                if b == 0 || b > MAX_BITS {
                    return Err(Error::Config(format!("quantizer bits must be in 1..={MAX_BITS}, got {b}")));
                }
                if !(self.clip_range.is_finite() && self.clip_range > 0.0) {
                    return Err(Error::Config(format!(
                        "quantizer clip range must be positive and finite, got {}",
                        self.clip_range
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn is_lossless(&self) -> bool {
        self.resolution == Resolution::Lossless
    }

    /// Bits per real component as charged on the air interface.
    pub fn bits_per_component(&self) -> u32 {
        match self.resolution {
            Resolution::Bits(b) => b,
            Resolution::Lossless => LOSSLESS_BITS,
        }
    }

    pub fn levels(&self) -> Option<u64> {
        match self.resolution {
            Resolution::Bits(b) => Some(1u64 << b),
            Resolution::Lossless => None,
        }
    }

    /// Step `Δ = 2r / 2^b`; zero for the lossless quantizer.
    pub fn step(&self) -> f64 {
        match self.resolution {
            Resolution::Bits(b) => 2.0 * self.clip_range / (1u64 << b) as f64,
            Resolution::Lossless => 0.0,
        }
    }

    /// Feedback cost of one `rows × cols` matrix: real and imaginary part of
    /// every entry.
    pub fn matrix_bits(&self, rows: usize, cols: usize) -> u64 {
        2 * (rows * cols) as u64 * u64::from(self.bits_per_component())
    }
}

pub fn quantize_scalar(x: f64, cfg: &QuantizerConfig) -> f64 {
    let Resolution::Bits(bits) = cfg.resolution else {
        return x;
    };
    let step = cfg.step();
    let half_levels = (1i64 << (bits - 1)) as f64;
    let index = (x / step).floor().clamp(-half_levels, half_levels - 1.0);
    (index + 0.5) * step
}

pub fn quantize_complex(z: Complex64, cfg: &QuantizerConfig) -> Complex64 {
    Complex64::new(quantize_scalar(z.re, cfg), quantize_scalar(z.im, cfg))
}

pub fn quantize_matrix(h: &ChannelMatrix, cfg: &QuantizerConfig) -> ChannelMatrix {
    h.map(|z| quantize_complex(z, cfg))
}

/// `Δ²/12`: per-real-dimension MSE for input uniform on `[-r, r]`.
pub fn distortion_power(cfg: &QuantizerConfig) -> f64 {
    let step = cfg.step();
    step * step / 12.0
}
