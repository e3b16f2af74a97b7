//! Sample containers shared by every transform.

use crate::error::{Error, Result};
use std::ops::{Deref, DerefMut};

/// A one-dimensional real signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal(Vec<f64>);

impl Signal {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidLength("signal must have at least one sample".into()));
        }
        Ok(Signal(samples))
    }

    pub fn zeros(len: usize) -> Self {
        Signal(vec![0.0; len.max(1)])
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Circular shift so that `out[(n + shift) mod N] = self[n]`.
    pub fn roll(&self, shift: isize) -> Signal {
        Signal(roll(&self.0, shift))
    }
}

impl Deref for Signal {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Signal {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Signal> for Vec<f64> {
    fn from(s: Signal) -> Self {
        s.0
    }
}

pub(crate) fn roll(x: &[f64], shift: isize) -> Vec<f64> {
    let n = x.len() as isize;
    let mut out = vec![0.0; x.len()];
    for (i, &v) in x.iter().enumerate() {
        out[((i as isize + shift).rem_euclid(n)) as usize] = v;
    }
    out
}

/// A single-channel image stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidLength(format!("image must be non-empty, got {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidLength(format!(
                "{rows}x{cols} image needs {} pixels, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Image { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Image {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Image { rows, cols, data }
    }

    /// Outer product `u vᵀ`.
    pub fn outer(u: &[f64], v: &[f64]) -> Self {
        Image::from_fn(u.len(), v.len(), |i, j| u[i] * v[j])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Image {
        Image::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Image {
        Image {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Circular translation by (`dr`, `dc`).
    pub fn roll(&self, dr: isize, dc: isize) -> Image {
        let (r, c) = (self.rows as isize, self.cols as isize);
        let mut out = Image::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let ti = (i as isize + dr).rem_euclid(r) as usize;
                let tj = (j as isize + dc).rem_euclid(c) as usize;
                out.set(ti, tj, self.get(i, j));
            }
        }
        out
    }

    pub fn add(&self, other: &Image) -> Image {
        debug_assert_eq!(self.shape(), other.shape());
        Image {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Image) -> Image {
        debug_assert_eq!(self.shape(), other.shape());
        Image {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Image {
        self.map(|v| v * s)
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.energy().sqrt()
    }

    pub fn min_max(&self) -> (f64, f64) {
        min_max(&self.data)
    }
}

pub(crate) fn min_max(x: &[f64]) -> (f64, f64) {
    x.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Relative L2 error `‖a − b‖ / ‖b‖`, or the absolute error when `b` is zero.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let base = norm(b);
    if base > 0.0 {
        diff / base
    } else {
        diff
    }
}

/// Checks that `len` is divisible by `2^levels`.
pub(crate) fn check_dyadic(len: usize, levels: usize, what: &str) -> Result<()> {
    if levels == 0 {
        return Err(Error::OutOfRange("transform needs at least one level".into()));
    }
    if levels >= usize::BITS as usize || !len.is_multiple_of(1usize << levels) || len == 0 {
        return Err(Error::InvalidLength(format!(
            "{what} of length {len} is not divisible by 2^{levels}"
        )));
    }
    Ok(())
}
