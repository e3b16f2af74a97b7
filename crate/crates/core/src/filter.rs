//! Scaling filters and the rules that derive every other filter from them.
//!
//! Taps are indexed `0..k`. Time reversal `h[-n]` is realized as
//! `n -> k - 1 - n`; a different origin only rotates periodic outputs.

use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

/// An FIR filter with an even number of taps (at least two).
#[derive(Debug, Clone, PartialEq)]
pub struct Filter {
    taps: Vec<f64>,
}

impl Filter {
    pub fn new(taps: Vec<f64>) -> Result<Self> {
        if taps.len() < 2 || !taps.len().is_multiple_of(2) {
            return Err(Error::InvalidLength(format!(
                "filter length must be even and at least 2, got {}",
                taps.len()
            )));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::Parse("filter taps must be finite".into()));
        }
        Ok(Filter { taps })
    }

    /// Orthonormal Haar scaling filter `[1/√2, 1/√2]`.
    pub fn haar() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Filter { taps: vec![s, s] }
    }

    /// Haar taps centred inside a zero filter of length `k`.
    pub fn haar_padded(k: usize) -> Result<Self> {
        let mut taps = vec![0.0; k];
        if k >= 2 && k.is_multiple_of(2) {
            taps[k / 2 - 1] = std::f64::consts::FRAC_1_SQRT_2;
            taps[k / 2] = std::f64::consts::FRAC_1_SQRT_2;
        }
        Filter::new(taps)
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn norm(&self) -> f64 {
        crate::signal::norm(&self.taps)
    }

    pub fn mean(&self) -> f64 {
        self.taps.iter().sum::<f64>() / self.taps.len() as f64
    }

    /// Quadrature-mirror wavelet filter, `g[n] = (-1)^n h[k-1-n]`.
    pub fn wavelet(&self) -> Filter {
        Filter {
            taps: mirror_taps(&self.taps),
        }
    }

    /// Time-reversed filter, `h2[n] = h1[k-1-n]`.
    pub fn reversed(&self) -> Filter {
        Filter {
            taps: self.taps.iter().rev().copied().collect(),
        }
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        text.parse()
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_string()).map_err(|e| Error::io(path, e))
    }
}

pub(crate) fn mirror_taps(h: &[f64]) -> Vec<f64> {
    let k = h.len();
    (0..k)
        .map(|n| if n % 2 == 0 { h[k - 1 - n] } else { -h[k - 1 - n] })
        .collect()
}

/// Applies the QMF rule to `h`.
pub fn derive_wavelet_filter(h: &Filter) -> Filter {
    h.wavelet()
}

/// Applies the q-shift rule to `h1`.
pub fn derive_qshift_partner(h1: &Filter) -> Filter {
    h1.reversed()
}

impl std::fmt::Display for Filter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut out = format!("# dtfilter v1 k={}\n", self.taps.len());
        for t in &self.taps {
            let _ = writeln!(out, "{}", crate::io::fmt_f64(*t));
        }
        f.write_str(&out)
    }
}

impl FromStr for Filter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty filter file".into()))?;
        let k: usize = header
            .strip_prefix("# dtfilter v1 k=")
            .ok_or_else(|| Error::Parse(format!("bad filter header `{header}`")))?
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad tap count in `{header}`")))?;
        let taps = lines
            .filter(|l| !l.starts_with('#'))
            .map(|l| {
                l.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad coefficient `{l}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if taps.len() != k {
            return Err(Error::Parse(format!(
                "header declares {k} taps, file has {}",
                taps.len()
            )));
        }
        Filter::new(taps)
    }
}

/// The two learnable filters of a q-shift dual-tree transform.
///
/// `h1` is used from level two onwards and `h1_first` at level one. The
/// second tree uses the time reverses of both, and every wavelet filter is the
/// QMF mirror of its scaling filter.
#[derive(Debug, Clone, PartialEq)]
pub struct DualTreeFilterSet {
    pub h1: Filter,
    pub h1_first: Filter,
}

/// Which of the two trees a filter belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tree {
    One,
    Two,
}

impl Tree {
    pub const BOTH: [Tree; 2] = [Tree::One, Tree::Two];

    pub fn index(self) -> usize {
        match self {
            Tree::One => 0,
            Tree::Two => 1,
        }
    }
}

impl DualTreeFilterSet {
    pub fn new(h1: Filter, h1_first: Filter) -> Self {
        DualTreeFilterSet { h1, h1_first }
    }

    /// Both trees share `h` at every level. Mostly useful as a degenerate case.
    pub fn haar() -> Self {
        DualTreeFilterSet::new(Filter::haar(), Filter::haar())
    }

    pub fn read(h1: impl AsRef<Path>, h1_first: impl AsRef<Path>) -> Result<Self> {
        Ok(DualTreeFilterSet::new(Filter::read(h1)?, Filter::read(h1_first)?))
    }

    pub fn g1(&self) -> Filter {
        self.h1.wavelet()
    }

    pub fn h2(&self) -> Filter {
        self.h1.reversed()
    }

    pub fn g2(&self) -> Filter {
        self.h2().wavelet()
    }

    pub fn h2_first(&self) -> Filter {
        self.h1_first.reversed()
    }

    pub fn g2_first(&self) -> Filter {
        self.h2_first().wavelet()
    }

    /// Per-level scaling filters for one tree.
    pub fn tree(&self, tree: Tree) -> LevelFilters {
        match tree {
            Tree::One => LevelFilters::new(self.h1_first.clone(), self.h1.clone()),
            Tree::Two => LevelFilters::new(self.h2_first(), self.h2()),
        }
    }
}

/// Scaling filters for a single tree: one for level one, one for the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelFilters {
    first: Filter,
    rest: Filter,
}

impl LevelFilters {
    pub fn new(first: Filter, rest: Filter) -> Self {
        LevelFilters { first, rest }
    }

    pub fn uniform(h: Filter) -> Self {
        LevelFilters {
            first: h.clone(),
            rest: h,
        }
    }

    /// Scaling filter for 1-based `level`.
    pub fn at(&self, level: usize) -> &Filter {
        if level <= 1 {
            &self.first
        } else {
            &self.rest
        }
    }
}
