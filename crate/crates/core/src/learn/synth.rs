//! Synthetic training data: sums of octave-spaced sines, and oriented
//! images built from them.

use crate::error::{Error, Result};
use crate::signal::{Image, Signal};
use rand::Rng;
use std::f64::consts::{PI, TAU};

/// Parameters of the synthetic generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    /// Number of harmonics `K`.
    pub harmonics: usize,
    /// Side of the square images.
    pub size: usize,
    /// Spatial frequency (radians per pixel) of the first harmonic.
    pub base_frequency: f64,
    pub seed: u64,
}

impl SynthConfig {
    /// `K = 5`, with the first harmonic spanning half the image.
    pub fn new(size: usize, seed: u64) -> Self {
        SynthConfig {
            harmonics: 5,
            size,
            base_frequency: 2.0 * TAU / size as f64,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.harmonics == 0 {
            return Err(Error::OutOfRange("at least one harmonic is required".into()));
        }
        if self.size == 0 || !self.base_frequency.is_finite() {
            return Err(Error::OutOfRange("image size and base frequency must be positive".into()));
        }
        Ok(())
    }
}

/// One draw of `x(t) = Σ_k a_k sin(2^k t + φ_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Harmonics {
    pub amplitudes: Vec<f64>,
    pub phases: Vec<f64>,
}

impl Harmonics {
    /// Indicators `a_k ∈ {0, 1}` (redrawn until one is set) and uniform
    /// phases in `[0, 2π)`.
    pub fn sample(k: usize, rng: &mut impl Rng) -> Self {
        let amplitudes = loop {
            let a: Vec<f64> = (0..k).map(|_| if rng.gen::<bool>() { 1.0 } else { 0.0 }).collect();
            if a.iter().any(|&v| v != 0.0) {
                break a;
            }
        };
        let phases = (0..k).map(|_| rng.gen_range(0.0..TAU)).collect();
        Harmonics { amplitudes, phases }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.amplitudes
            .iter()
            .zip(&self.phases)
            .enumerate()
            .map(|(k, (a, p))| if *a == 0.0 { 0.0 } else { a * ((1u64 << k) as f64 * t + p).sin() })
            .sum()
    }
}

/// Evaluates a fresh draw on the sample grid `t`.
pub fn gen_signal(t: &[f64], cfg: &SynthConfig, rng: &mut impl Rng) -> Result<Signal> {
    cfg.validate()?;
    let h = Harmonics::sample(cfg.harmonics, rng);
    Signal::new(t.iter().map(|&v| h.eval(v)).collect())
}

/// `pixel(u, v) = x(f0 · (u cos θ + v sin θ))` with `θ ~ U[0, π)`.
pub fn gen_image(cfg: &SynthConfig, rng: &mut impl Rng) -> Result<Image> {
    cfg.validate()?;
    let h = Harmonics::sample(cfg.harmonics, rng);
    let theta = rng.gen_range(0.0..PI);
    let (s, c) = theta.sin_cos();
    let f0 = cfg.base_frequency;
    Ok(Image::from_fn(cfg.size, cfg.size, |u, v| {
        h.eval(f0 * (u as f64 * c + v as f64 * s))
    }))
}

/// `count` images from a generator seeded with `cfg.seed`.
pub fn dataset(cfg: &SynthConfig, count: usize) -> Result<Vec<Image>> {
    let mut rng = super::rng(cfg.seed, 0);
    (0..count).map(|_| gen_image(cfg, &mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn silent_harmonics_give_zero() {
        let h = Harmonics {
            amplitudes: vec![0.0; 3],
            phases: vec![1.0, 2.0, 3.0],
        };
        assert!((0..50).all(|i| h.eval(i as f64 * 0.3) == 0.0));
    }

    #[test]
    fn single_harmonic_is_one_bin() {
        let h = Harmonics {
            amplitudes: vec![1.0],
            phases: vec![0.0],
        };
        let n = 64;
        let x: Vec<f64> = (0..n).map(|i| h.eval(TAU * 4.0 * i as f64 / n as f64)).collect();
        // plain DFT magnitudes
        let mag: Vec<f64> = (0..n)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (i, v) in x.iter().enumerate() {
                    let a = TAU * (k * i) as f64 / n as f64;
                    re += v * a.cos();
                    im -= v * a.sin();
                }
                re.hypot(im)
            })
            .collect();
        let total: f64 = mag.iter().map(|m| m * m).sum();
        assert!((mag[4].powi(2) + mag[n - 4].powi(2)) / total > 1.0 - 1e-12);
    }

    #[test]
    fn each_harmonic_appears_half_the_time() {
        let mut rng = crate::learn::rng(3, 0);
        let k = 5;
        let mut counts = vec![0usize; k];
        let draws = 1000;
        for _ in 0..draws {
            let h = Harmonics::sample(k, &mut rng);
            for (c, a) in counts.iter_mut().zip(&h.amplitudes) {
                *c += (*a != 0.0) as usize;
            }
            assert!(h.phases.iter().all(|p| (0.0..TAU).contains(p)));
        }
        // redrawing the all-zero case lifts the rate to 16/31 ≈ 0.516
        for c in counts {
            let f = c as f64 / draws as f64;
            assert!((f - 0.5).abs() < 0.05, "{f}");
        }
    }

    #[test]
    fn dataset_is_deterministic() {
        let mut cfg = SynthConfig::new(32, 7);
        cfg.harmonics = 4;
        let a = dataset(&cfg, 3).unwrap();
        let b = dataset(&cfg, 3).unwrap();
        assert_eq!(a, b);
        assert_ne!(a[0], a[1]);
        assert!(a[0].data().iter().all(|v| v.abs() <= 4.0));
        cfg.seed = 8;
        assert_ne!(dataset(&cfg, 1).unwrap()[0], a[0]);
    }

    #[test]
    fn signal_on_grid() {
        let cfg = SynthConfig::new(16, 0);
        let t: Vec<f64> = (0..16).map(|i| i as f64 * 0.1).collect();
        let s = gen_signal(&t, &cfg, &mut crate::learn::rng(1, 0)).unwrap();
        assert_eq!(s.len(), 16);
        let bad = SynthConfig { harmonics: 0, ..cfg };
        assert!(gen_signal(&t, &bad, &mut crate::learn::rng(1, 0)).is_err());
    }
}
