//! Decimated 1D wavelet transform.

use crate::error::{Error, Result};
use crate::filter::{Filter, LevelFilters};
use crate::io::BandFile;
use crate::multirate::{analyze, synthesize_add, Axis};
use crate::signal::{check_dyadic, Signal};

/// Approximation `a_J` plus details `d_1 … d_J` (index 0 holds `d_1`).
#[derive(Debug, Clone, PartialEq)]
pub struct Pyramid1D {
    pub approx: Vec<f64>,
    pub details: Vec<Vec<f64>>,
}

impl Pyramid1D {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    /// Length of the signal this pyramid came from.
    pub fn signal_len(&self) -> usize {
        self.approx.len() << self.levels()
    }

    /// Detail band for 1-based `level`.
    pub fn detail(&self, level: usize) -> &[f64] {
        &self.details[level - 1]
    }

    pub fn zeros(n: usize, levels: usize) -> Self {
        Pyramid1D {
            approx: vec![0.0; n >> levels],
            details: (1..=levels).map(|j| vec![0.0; n >> j]).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let j = self.levels();
        if j == 0 || self.approx.is_empty() {
            return Err(Error::Structure("pyramid has no levels".into()));
        }
        let n = self.signal_len();
        for (i, d) in self.details.iter().enumerate() {
            if d.len() != n >> (i + 1) {
                return Err(Error::Structure(format!(
                    "detail level {} has {} coefficients, expected {}",
                    i + 1,
                    d.len(),
                    n >> (i + 1)
                )));
            }
        }
        Ok(())
    }

    /// Every coefficient, details first.
    pub fn coefficients(&self) -> impl Iterator<Item = f64> + '_ {
        self.details.iter().flatten().chain(&self.approx).copied()
    }

    pub fn to_band_file(&self) -> BandFile {
        let mut f = BandFile::new("pyr1d")
            .field("J", self.levels())
            .field("N", self.signal_len());
        for (i, d) in self.details.iter().enumerate() {
            f.push(format!("d{}", i + 1), d);
        }
        f.push("a", &self.approx);
        f
    }

    pub fn from_band_file(mut f: BandFile) -> Result<Self> {
        if f.kind != "pyr1d" || f.get_field("trees").is_some() {
            return Err(Error::Parse(format!("expected a pyr1d file, found `{}`", f.kind)));
        }
        let levels = f.usize_field("J")?;
        let n = f.usize_field("N")?;
        let details = (1..=levels)
            .map(|j| f.take(&format!("d{j}")))
            .collect::<Result<Vec<_>>>()?;
        let p = Pyramid1D {
            approx: f.take("a")?,
            details,
        };
        p.validate()?;
        if p.signal_len() != n {
            return Err(Error::Structure("band lengths disagree with N".into()));
        }
        Ok(p)
    }
}

pub(crate) fn forward_levels(x: &[f64], filters: &LevelFilters, levels: usize) -> Result<Pyramid1D> {
    check_dyadic(x.len(), levels, "signal")?;
    let mut a = x.to_vec();
    let mut details = Vec::with_capacity(levels);
    for level in 1..=levels {
        let h = filters.at(level);
        let g = h.wavelet();
        let n = a.len();
        details.push(analyze(&a, 1, n, g.taps(), Axis::Rows));
        a = analyze(&a, 1, n, h.taps(), Axis::Rows);
    }
    Ok(Pyramid1D { approx: a, details })
}

pub(crate) fn inverse_levels(p: &Pyramid1D, filters: &LevelFilters) -> Result<Vec<f64>> {
    p.validate()?;
    let mut a = p.approx.clone();
    for level in (1..=p.levels()).rev() {
        let h = filters.at(level);
        let g = h.wavelet();
        let half = a.len();
        let mut out = vec![0.0; 2 * half];
        synthesize_add(&a, 1, half, h.taps(), Axis::Rows, &mut out);
        synthesize_add(p.detail(level), 1, half, g.taps(), Axis::Rows, &mut out);
        a = out;
    }
    Ok(a)
}

/// `J`-level forward transform with the QMF pair derived from `h`.
pub fn dwt1d_forward(x: &Signal, h: &Filter, levels: usize) -> Result<Pyramid1D> {
    forward_levels(x, &LevelFilters::uniform(h.clone()), levels)
}

/// Inverse of [`dwt1d_forward`]; exact for orthogonal `h`.
pub fn dwt1d_inverse(p: &Pyramid1D, h: &Filter) -> Result<Signal> {
    Signal::new(inverse_levels(p, &LevelFilters::uniform(h.clone()))?)
}

/// Full-length level-`level` detail via the à-trous scheme. Sampling the
/// output at stride `2^level` gives the decimated detail band.
pub fn undecimated_detail(x: &Signal, h: &Filter, level: usize) -> Result<Signal> {
    if level == 0 {
        return Err(Error::OutOfRange("level must be at least 1".into()));
    }
    let n = x.len();
    let dilated = |f: &[f64], step: usize, a: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| {
                f.iter()
                    .enumerate()
                    .map(|(m, fm)| fm * a[(i + step * m) % n])
                    .sum()
            })
            .collect()
    };
    let mut a = x.to_vec();
    for l in 1..level {
        a = dilated(h.taps(), 1 << (l - 1), &a);
    }
    Signal::new(dilated(h.wavelet().taps(), 1 << (level - 1), &a))
}
