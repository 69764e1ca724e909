//! Flat `section.key = value` experiment files.
//!
//! Blank lines and `#` comments are ignored. Every key is optional; unknown
//! or repeated keys are errors. `channel.fm = auto` derives the normalized
//! Doppler from `channel.speed`, `channel.wavelength` and
//! `channel.sample_period`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::channel::DopplerParams;
use crate::error::{Error, Result};
use crate::predictor::Split;
use crate::protocol::{LinkConfig, Scheme};
use crate::quant::Resolution;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// `N_r`.
    pub rows: usize,
    /// `N_t`.
    pub cols: usize,
    /// `u`.
    pub ar_order: usize,
    /// Normalized maximum Doppler `f_m = f_D·T_s`.
    pub fm: f64,
    pub bits: Vec<Resolution>,
    pub schemes: Vec<Scheme>,
    pub operational_slots: usize,
    pub trials: usize,
    pub base_seed: u64,
    pub noise_power: f64,
    pub link: LinkConfig,
    pub output_dir: PathBuf,
    pub plot: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            rows: 1,
            cols: 2,
            ar_order: 1,
            fm: 0.01,
            bits: vec![Resolution::Bits(1), Resolution::Bits(2), Resolution::Bits(3)],
            schemes: Scheme::ALL.to_vec(),
            operational_slots: 10_000,
            trials: 20,
            base_seed: 1,
            noise_power: 1.0,
            link: LinkConfig::default(),
            output_dir: PathBuf::from("results"),
            plot: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("channel.rows", self.rows),
            ("channel.cols", self.cols),
            ("channel.ar_order", self.ar_order),
            ("phase.operational_slots", self.operational_slots),
            ("sweep.trials", self.trials),
        ];
        for (key, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("{key} must be positive")));
            }
        }
        if !(0.0..0.5).contains(&self.fm) {
            return Err(Error::Config(format!("channel.fm must be in [0, 0.5), got {}", self.fm)));
        }
        if self.bits.is_empty() {
            return Err(Error::Config("sweep.bits must not be empty".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("sweep.schemes must not be empty".into()));
        }
        if !(self.noise_power.is_finite() && self.noise_power > 0.0) {
            return Err(Error::Config("metrics.noise_power must be positive".into()));
        }
        self.link.validate()
    }

    pub fn total_slots(&self) -> usize {
        self.link.warmup_slots + self.operational_slots
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| e.context(path.display().to_string()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim().to_ascii_lowercase();
            if entries.insert(key.clone(), (i + 1, value.trim().to_string())).is_some() {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("duplicate key `{key}`"),
                });
            }
        }
        let mut p = Parser { entries };
        let mut cfg = ExperimentConfig::default();

        p.set("channel.rows", &mut cfg.rows)?;
        p.set("channel.cols", &mut cfg.cols)?;
        p.set("channel.ar_order", &mut cfg.ar_order)?;
        let speed: Option<f64> = p.take("channel.speed")?;
        let wavelength: Option<f64> = p.take("channel.wavelength")?;
        let period: Option<f64> = p.take("channel.sample_period")?;
        if let Some((line, fm)) = p.entries.remove("channel.fm") {
            cfg.fm = if fm.eq_ignore_ascii_case("auto") {
                match (speed, wavelength, period) {
                    (Some(v), Some(l), Some(t)) => DopplerParams::new(v, l, t)?.normalized_doppler(),
                    _ => {
                        return Err(Error::Parse {
                            line,
                            message: "channel.fm = auto needs channel.speed, channel.wavelength and channel.sample_period".into(),
                        })
                    }
                }
            } else {
                parse_value(line, "channel.fm", &fm)?
            };
        }

        if let Some(v) = p.take_list::<Resolution>("sweep.bits")? {
            cfg.bits = v;
        }
        if let Some(v) = p.take_list::<Scheme>("sweep.schemes")? {
            cfg.schemes = v;
        }
        p.set("sweep.trials", &mut cfg.trials)?;
        p.set("sweep.seed", &mut cfg.base_seed)?;

        p.set("phase.warmup_slots", &mut cfg.link.warmup_slots)?;
        p.set("phase.operational_slots", &mut cfg.operational_slots)?;

        p.set("quant.warmup_bits", &mut cfg.link.warmup_resolution)?;
        p.set("quant.range_factor", &mut cfg.link.range_factor)?;
        p.set("quant.channel_variance", &mut cfg.link.channel_variance)?;
        p.set("quant.clip_range", &mut cfg.link.csi_range)?;
        p.set("quant.residual_range", &mut cfg.link.residual_range)?;

        let rnn = &mut cfg.link.rnn;
        p.set("rnn.delay_taps", &mut rnn.delay_taps)?;
        p.set("rnn.horizon", &mut rnn.horizon)?;
        p.set("rnn.hidden_neurons", &mut rnn.hidden_neurons)?;
        p.set("rnn.epochs", &mut rnn.epochs)?;
        p.set("rnn.learning_rate", &mut rnn.learning_rate)?;
        p.set("rnn.batch_size", &mut rnn.batch_size)?;
        p.set("rnn.weight_decay", &mut rnn.weight_decay)?;
        p.set("rnn.patience", &mut rnn.patience)?;
        p.set("rnn.plateau_epochs", &mut rnn.plateau_epochs)?;
        if let Some(v) = p.take_list::<f64>("rnn.split")? {
            let [train, validation, test] = v[..] else {
                return Err(Error::Config("rnn.split needs three fractions".into()));
            };
            rnn.split = Split { train, validation, test };
        }
        p.set("rnn.hold_fallback", &mut cfg.link.hold_fallback)?;
        p.set("rnn.verify_twins", &mut cfg.link.verify_twin_training)?;

        p.set("metrics.noise_power", &mut cfg.noise_power)?;
        if let Some(dir) = p.take::<String>("output.dir")? {
            cfg.output_dir = PathBuf::from(dir);
        }
        p.set("output.plot", &mut cfg.plot)?;

        if let Some((key, (line, _))) = p.entries.into_iter().next() {
            return Err(Error::Parse {
                line,
                message: format!("unknown key `{key}`"),
            });
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

struct Parser {
    entries: BTreeMap<String, (usize, String)>,
}

impl Parser {
    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, v)) => parse_value(line, key, &v).map(Some),
        }
    }

    fn set<T: FromStr>(&mut self, key: &str, slot: &mut T) -> Result<()>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = self.take(key)? {
            *slot = v;
        }
        Ok(())
    }

    fn take_list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, v)) => v
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| parse_value(line, key, s))
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse().map_err(|e: T::Err| Error::Parse {
        line,
        message: format!("bad value `{}` for {key}: {e}", value.trim()),
    })
}
