//! Dominant orientation of a nonnegative image from its second moments.

use crate::error::{Error, Result};
use crate::signal::Image;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orientation {
    /// Direction of the principal axis in degrees, `[0, 180)`, measured
    /// from the column axis towards increasing row index.
    pub angle: f64,
    /// `(λmax − λmin) / (λmax + λmin)` of the moment matrix.
    pub purity: f64,
}

/// Orientation of the mass distribution of `m` about its centroid.
pub fn orientation_purity(m: &Image) -> Result<Orientation> {
    if m.data().iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Error::OutOfRange("orientation needs a finite nonnegative image".into()));
    }
    let total: f64 = m.data().iter().sum();
    if total == 0.0 {
        return Err(Error::Undefined("orientation of an all-zero image".into()));
    }
    let (mut ci, mut cj) = (0.0, 0.0);
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let w = m.get(i, j);
            ci += w * i as f64;
            cj += w * j as f64;
        }
    }
    ci /= total;
    cj /= total;
    let (mut sii, mut sjj, mut sij) = (0.0, 0.0, 0.0);
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let w = m.get(i, j);
            let (di, dj) = (i as f64 - ci, j as f64 - cj);
            sii += w * di * di;
            sjj += w * dj * dj;
            sij += w * di * dj;
        }
    }
    let spread = ((sjj - sii) / 2.0).hypot(sij);
    let trace = sii + sjj;
    let purity = if trace > 0.0 { (2.0 * spread / trace).min(1.0) } else { 0.0 };
    let angle = (0.5 * (2.0 * sij).atan2(sjj - sii)).to_degrees().rem_euclid(180.0);
    Ok(Orientation { angle, purity })
}

/// [`orientation_purity`] of the centred power spectrum of `x`.
pub fn spectral_orientation(x: &Image) -> Result<Orientation> {
    let (r, c) = x.shape();
    let mut buf: Vec<Complex<f64>> = x.data().iter().map(|v| Complex::new(*v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    let fr = planner.plan_fft_forward(c);
    for row in buf.chunks_mut(c) {
        fr.process(row);
    }
    let fc = planner.plan_fft_forward(r);
    let mut col = vec![Complex::new(0.0, 0.0); r];
    for j in 0..c {
        for i in 0..r {
            col[i] = buf[i * c + j];
        }
        fc.process(&mut col);
        for i in 0..r {
            buf[i * c + j] = col[i];
        }
    }
    let power = Image::new(r, c, buf.iter().map(|z| z.norm_sqr()).collect())?;
    orientation_purity(&power.roll((r / 2) as isize, (c / 2) as isize))
}

/// Size of the largest set of angles (degrees, modulo 180) that are
/// pairwise at least `sep` apart.
pub fn distinct_angles(angles: &[f64], sep: f64) -> usize {
    let mut a: Vec<f64> = angles.iter().map(|v| v.rem_euclid(180.0)).collect();
    a.sort_by(f64::total_cmp);
    let gap = |x: f64, y: f64| {
        let d = (x - y).abs() % 180.0;
        d.min(180.0 - d)
    };
    (0..a.len())
        .map(|start| {
            let mut picked: Vec<f64> = Vec::new();
            for k in 0..a.len() {
                let v = a[(start + k) % a.len()];
                if picked.iter().all(|p| gap(*p, v) >= sep) {
                    picked.push(v);
                }
            }
            picked.len()
        })
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(n: usize, si: f64, sj: f64) -> Image {
        let c = (n as f64 - 1.0) / 2.0;
        Image::from_fn(n, n, |i, j| {
            (-(i as f64 - c).powi(2) / (2.0 * si * si) - (j as f64 - c).powi(2) / (2.0 * sj * sj)).exp()
        })
    }

    #[test]
    fn ridge() {
        let m = Image::from_fn(33, 33, |i, j| if i == 16 && (4..29).contains(&j) { 1.0 } else { 0.0 });
        let o = orientation_purity(&m).unwrap();
        assert!(o.purity > 0.9);
        assert!(o.angle.min(180.0 - o.angle) < 1e-9);
        let o = orientation_purity(&m.transpose()).unwrap();
        assert!((o.angle - 90.0).abs() < 1e-9);
    }

    #[test]
    fn diagonal_ridge_angle() {
        let m = Image::from_fn(32, 32, |i, j| if i == j { 1.0 } else { 0.0 });
        let o = orientation_purity(&m).unwrap();
        assert!((o.angle - 45.0).abs() < 1e-9 && o.purity > 0.99);
    }

    #[test]
    fn symmetric_blobs() {
        assert!(orientation_purity(&gaussian(31, 4.0, 4.0)).unwrap().purity < 0.05);
        let cross = Image::from_fn(21, 21, |i, j| if i == 10 || j == 10 { 1.0 } else { 0.0 });
        assert!(orientation_purity(&cross).unwrap().purity < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(matches!(orientation_purity(&Image::zeros(4, 4)), Err(Error::Undefined(_))));
        let mut m = Image::zeros(4, 4);
        m.set(0, 0, -1.0);
        assert!(orientation_purity(&m).is_err());
    }

    #[test]
    fn spectrum_of_stripes_is_perpendicular() {
        // constant along rows, varying down columns: energy on the row-frequency axis
        let x = Image::from_fn(32, 32, |i, _| (std::f64::consts::TAU * 4.0 * i as f64 / 32.0).cos());
        let o = spectral_orientation(&x).unwrap();
        assert!((o.angle - 90.0).abs() < 1e-9 && o.purity > 0.99);
    }

    #[test]
    fn angle_counting() {
        assert_eq!(distinct_angles(&[0.0, 10.0, 30.0, 60.0], 20.0), 3);
        assert_eq!(distinct_angles(&[0.0, 45.0, 90.0, 135.0], 20.0), 4);
        assert_eq!(distinct_angles(&[], 20.0), 0);
        assert_eq!(distinct_angles(&[5.0, 175.0], 20.0), 1);
    }
}
