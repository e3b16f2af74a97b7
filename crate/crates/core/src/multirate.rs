//! Periodic decimating convolution, its adjoint, and uniform quantization.
//!
//! All kernels treat a buffer as a `rows x cols` row-major matrix and filter
//! along one [`Axis`]. Boundaries are periodic; filters longer than the
//! filtered dimension wrap around more than once.

use crate::error::{Error, Result};
use crate::filter::Filter;
use crate::signal::{min_max, Image, Signal};

/// Direction along which a 1D filter is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Filter each row (the column index varies).
    Rows,
    /// Filter each column (the row index varies).
    Cols,
}

impl Axis {
    /// Shape after decimating along this axis.
    pub fn halved(self, rows: usize, cols: usize) -> (usize, usize) {
        match self {
            Axis::Rows => (rows, cols / 2),
            Axis::Cols => (rows / 2, cols),
        }
    }

    /// Shape after upsampling along this axis.
    pub fn doubled(self, rows: usize, cols: usize) -> (usize, usize) {
        match self {
            Axis::Rows => (rows, cols * 2),
            Axis::Cols => (rows * 2, cols),
        }
    }
}

#[inline]
fn periodic_extend(x: &[f64], extra: usize, ext: &mut Vec<f64>) {
    ext.clear();
    ext.extend_from_slice(x);
    let n = x.len();
    for i in 0..extra {
        ext.push(x[i % n]);
    }
}

/// `out[p] = Σ_m f[m] · x[(m + 2p) mod n]` along `axis`.
pub fn analyze(x: &[f64], rows: usize, cols: usize, f: &[f64], axis: Axis) -> Vec<f64> {
    debug_assert_eq!(x.len(), rows * cols);
    let k = f.len();
    match axis {
        Axis::Rows => {
            let half = cols / 2;
            let mut out = vec![0.0; rows * half];
            let mut ext = Vec::with_capacity(cols + k);
            for r in 0..rows {
                periodic_extend(&x[r * cols..(r + 1) * cols], k.saturating_sub(1), &mut ext);
                let dst = &mut out[r * half..(r + 1) * half];
                for (p, o) in dst.iter_mut().enumerate() {
                    let w = &ext[2 * p..2 * p + k];
                    *o = f.iter().zip(w).map(|(a, b)| a * b).sum();
                }
            }
            out
        }
        Axis::Cols => {
            let half = rows / 2;
            let mut out = vec![0.0; half * cols];
            for p in 0..half {
                let dst = &mut out[p * cols..(p + 1) * cols];
                for (m, &fm) in f.iter().enumerate() {
                    let src = (m + 2 * p) % rows;
                    let srow = &x[src * cols..(src + 1) * cols];
                    for (d, s) in dst.iter_mut().zip(srow) {
                        *d += fm * s;
                    }
                }
            }
            out
        }
    }
}

/// Adds the zero-upsampled, filtered `c` into `acc`:
/// `acc[(2n + m) mod N] += f[m] · c[n]` along `axis`. `rows`/`cols` describe `c`.
pub fn synthesize_add(c: &[f64], rows: usize, cols: usize, f: &[f64], axis: Axis, acc: &mut [f64]) {
    debug_assert_eq!(c.len(), rows * cols);
    debug_assert_eq!(acc.len(), rows * cols * 2);
    let k = f.len();
    match axis {
        Axis::Rows => {
            let full = cols * 2;
            let mut ext = vec![0.0; full + k];
            for r in 0..rows {
                ext.iter_mut().for_each(|v| *v = 0.0);
                for (n, &cv) in c[r * cols..(r + 1) * cols].iter().enumerate() {
                    if cv == 0.0 {
                        continue;
                    }
                    for (e, &fm) in ext[2 * n..2 * n + k].iter_mut().zip(f) {
                        *e += fm * cv;
                    }
                }
                let dst = &mut acc[r * full..(r + 1) * full];
                for (i, &e) in ext.iter().enumerate() {
                    dst[i % full] += e;
                }
            }
        }
        Axis::Cols => {
            let full = rows * 2;
            for n in 0..rows {
                let src = &c[n * cols..(n + 1) * cols];
                for (m, &fm) in f.iter().enumerate() {
                    let d = (2 * n + m) % full;
                    let drow = &mut acc[d * cols..(d + 1) * cols];
                    for (o, s) in drow.iter_mut().zip(src) {
                        *o += fm * s;
                    }
                }
            }
        }
    }
}

/// `out[m] = Σ_p coeff[p] · x[(m + 2p) mod n]` summed over every line along
/// `axis`; the derivative of [`analyze`] with respect to its filter taps.
/// `rows`/`cols` describe `x`; `coeff` has the decimated shape.
pub fn filter_correlation(
    x: &[f64],
    rows: usize,
    cols: usize,
    coeff: &[f64],
    k: usize,
    axis: Axis,
) -> Vec<f64> {
    let mut out = vec![0.0; k];
    match axis {
        Axis::Rows => {
            let half = cols / 2;
            let mut ext = Vec::with_capacity(cols + k);
            for r in 0..rows {
                periodic_extend(&x[r * cols..(r + 1) * cols], k.saturating_sub(1), &mut ext);
                for (p, &cv) in coeff[r * half..(r + 1) * half].iter().enumerate() {
                    if cv == 0.0 {
                        continue;
                    }
                    for (o, &e) in out.iter_mut().zip(&ext[2 * p..2 * p + k]) {
                        *o += cv * e;
                    }
                }
            }
        }
        Axis::Cols => {
            let half = rows / 2;
            for p in 0..half {
                let crow = &coeff[p * cols..(p + 1) * cols];
                for (m, o) in out.iter_mut().enumerate() {
                    let src = (m + 2 * p) % rows;
                    let srow = &x[src * cols..(src + 1) * cols];
                    *o += crow.iter().zip(srow).map(|(a, b)| a * b).sum::<f64>();
                }
            }
        }
    }
    out
}

/// One analysis step of the 1D transform: decimated periodic correlation.
pub fn circular_convolve_decimate(a: &Signal, f: &Filter) -> Result<Signal> {
    if !a.len().is_multiple_of(2) {
        return Err(Error::InvalidLength(format!("signal length {} is odd", a.len())));
    }
    if f.len() > a.len() {
        return Err(Error::UnsupportedSize(format!(
            "filter of {} taps is longer than signal of {} samples",
            f.len(),
            a.len()
        )));
    }
    Signal::new(analyze(a, 1, a.len(), f.taps(), Axis::Rows))
}

/// One synthesis summand of the inverse 1D transform, added onto `acc`.
pub fn upsample_convolve_accumulate(c: &Signal, f: &Filter, acc: &Signal) -> Result<Signal> {
    if acc.len() != 2 * c.len() {
        return Err(Error::InvalidLength(format!(
            "accumulator of length {} does not match 2 x {}",
            acc.len(),
            c.len()
        )));
    }
    let mut out = acc.to_vec();
    synthesize_add(c, 1, c.len(), f.taps(), Axis::Rows, &mut out);
    Signal::new(out)
}

/// Maps each value to the nearest of `levels` evenly spaced points spanning
/// `[min(x), max(x)]`. A constant input is returned unchanged.
pub fn quantize_uniform(x: &[f64], levels: usize) -> Result<Vec<f64>> {
    if levels < 2 {
        return Err(Error::OutOfRange(format!("need at least 2 quantization levels, got {levels}")));
    }
    let (lo, hi) = min_max(x);
    if hi <= lo {
        return Ok(x.to_vec());
    }
    let top = levels - 1;
    let step = (hi - lo) / top as f64;
    Ok(x.iter()
        .map(|&v| {
            let i = (((v - lo) / step).round() as usize).min(top);
            if i == top {
                hi
            } else {
                lo + i as f64 * step
            }
        })
        .collect())
}

pub fn quantize_image(x: &Image, levels: usize) -> Result<Image> {
    Image::new(x.rows(), x.cols(), quantize_uniform(x.data(), levels)?)
}
