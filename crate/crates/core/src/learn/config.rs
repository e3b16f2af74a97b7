//! Flat `key = value` training configuration.

use super::loss::{impulse_size, GaussianTarget, LossWeights, Objective};
use super::synth::SynthConfig;
use crate::dualtree::Variant;
use crate::error::{Error, Result};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

/// Everything a training run depends on.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub steps: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub variant: Variant,
    /// Taps of `h1`.
    pub k: usize,
    /// Taps of `h1_first`.
    pub k_first: usize,
    pub levels: usize,
    pub impulse_scale: usize,
    pub weights: LossWeights,
    pub alpha: f64,
    pub sigma: f64,
    /// Number of synthetic images.
    pub images: usize,
    pub synth: SynthConfig,
    /// Half-width of the uniform noise added to the padded Haar start.
    pub init_noise: f64,
    /// Write a checkpoint every this many steps (0 disables periodic ones).
    pub checkpoint_every: usize,
}

impl TrainConfig {
    pub fn new(variant: Variant) -> Self {
        TrainConfig {
            steps: 2000,
            batch_size: 16,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
            variant,
            k: 10,
            k_first: 10,
            levels: 4,
            impulse_scale: 4,
            weights: LossWeights::defaults(variant),
            alpha: 0.02,
            sigma: 10.0,
            images: 128,
            synth: SynthConfig::new(128, 0),
            init_noise: 1e-2,
            checkpoint_every: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 || !self.k.is_multiple_of(2) || self.k_first < 2 || !self.k_first.is_multiple_of(2) {
            return Err(Error::OutOfRange(format!(
                "filter lengths must be even and at least 2, got k={} k_first={}",
                self.k, self.k_first
            )));
        }
        if self.impulse_scale == 0 || self.levels == 0 {
            return Err(Error::OutOfRange("levels and impulse_scale must be at least 1".into()));
        }
        if self.batch_size == 0 || self.images == 0 {
            return Err(Error::OutOfRange("batch_size and images must be at least 1".into()));
        }
        LossWeights::new(self.weights.lambda1, self.weights.lambda2, self.weights.lambda3)?;
        self.synth.validate()?;
        crate::signal::check_dyadic(self.synth.size, self.levels, "image size")?;
        Ok(())
    }

    pub fn objective(&self) -> Objective {
        Objective {
            variant: self.variant,
            levels: self.levels,
            impulse_scale: self.impulse_scale,
            weights: self.weights,
            target: GaussianTarget::new(
                self.alpha,
                self.sigma,
                impulse_size(self.k, self.impulse_scale, Some(self.synth.size)),
            ),
        }
    }

    /// Hex SHA-256 of the canonical text form.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_string().as_bytes())
            .iter()
            .fold(String::new(), |mut s, b| {
                let _ = write!(s, "{b:02x}");
                s
            })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        std::fs::read_to_string(path)
            .map_err(|e| Error::io(path, e))?
            .parse()
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_string()).map_err(|e| Error::io(path, e))
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig::new(Variant::Complex)
    }
}

impl fmt::Display for TrainConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // `{}` on f64 prints the shortest string that parses back to the same bits
        writeln!(f, "variant = {}", self.variant)?;
        writeln!(f, "steps = {}", self.steps)?;
        writeln!(f, "batch_size = {}", self.batch_size)?;
        writeln!(f, "learning_rate = {}", self.learning_rate)?;
        writeln!(f, "beta1 = {}", self.beta1)?;
        writeln!(f, "beta2 = {}", self.beta2)?;
        writeln!(f, "epsilon = {}", self.epsilon)?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "k = {}", self.k)?;
        writeln!(f, "k_first = {}", self.k_first)?;
        writeln!(f, "levels = {}", self.levels)?;
        writeln!(f, "impulse_scale = {}", self.impulse_scale)?;
        writeln!(f, "lambda1 = {}", self.weights.lambda1)?;
        writeln!(f, "lambda2 = {}", self.weights.lambda2)?;
        writeln!(f, "lambda3 = {}", self.weights.lambda3)?;
        writeln!(f, "alpha = {}", self.alpha)?;
        writeln!(f, "sigma = {}", self.sigma)?;
        writeln!(f, "images = {}", self.images)?;
        writeln!(f, "harmonics = {}", self.synth.harmonics)?;
        writeln!(f, "image_size = {}", self.synth.size)?;
        writeln!(f, "base_frequency = {}", self.synth.base_frequency)?;
        writeln!(f, "data_seed = {}", self.synth.seed)?;
        writeln!(f, "init_noise = {}", self.init_noise)?;
        writeln!(f, "checkpoint_every = {}", self.checkpoint_every)
    }
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Parse(format!("bad value `{v}` for `{key}`")))
}

impl FromStr for TrainConfig {
    type Err = Error;

    /// Missing keys take defaults; `lambda3` and `base_frequency` default
    /// from `variant` and `image_size`.
    fn from_str(s: &str) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for (n, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", n + 1)))?;
            if kv.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(Error::Parse(format!("duplicate key `{}`", k.trim())));
            }
        }
        let variant: Variant = kv.remove("variant").map_or(Ok(Variant::Complex), |v| v.parse())?;
        let mut c = TrainConfig::new(variant);
        let mut base_frequency = None;
        for (k, v) in &kv {
            match k.as_str() {
                "steps" => c.steps = num(k, v)?,
                "batch_size" => c.batch_size = num(k, v)?,
                "learning_rate" => c.learning_rate = num(k, v)?,
                "beta1" => c.beta1 = num(k, v)?,
                "beta2" => c.beta2 = num(k, v)?,
                "epsilon" => c.epsilon = num(k, v)?,
                "seed" => c.seed = num(k, v)?,
                "k" => c.k = num(k, v)?,
                "k_first" => c.k_first = num(k, v)?,
                "levels" => c.levels = num(k, v)?,
                "impulse_scale" => c.impulse_scale = num(k, v)?,
                "lambda1" => c.weights.lambda1 = num(k, v)?,
                "lambda2" => c.weights.lambda2 = num(k, v)?,
                "lambda3" => c.weights.lambda3 = num(k, v)?,
                "alpha" => c.alpha = num(k, v)?,
                "sigma" => c.sigma = num(k, v)?,
                "images" => c.images = num(k, v)?,
                "harmonics" => c.synth.harmonics = num(k, v)?,
                "image_size" => c.synth.size = num(k, v)?,
                "base_frequency" => base_frequency = Some(num(k, v)?),
                "data_seed" => c.synth.seed = num(k, v)?,
                "init_noise" => c.init_noise = num(k, v)?,
                "checkpoint_every" => c.checkpoint_every = num(k, v)?,
                _ => return Err(Error::Parse(format!("unknown key `{k}`"))),
            }
        }
        c.synth.base_frequency = base_frequency.unwrap_or(SynthConfig::new(c.synth.size, 0).base_frequency);
        c.validate()?;
        Ok(c)
    }
}
