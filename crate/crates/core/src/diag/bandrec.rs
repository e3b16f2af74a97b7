//! Single-level reconstructions of analytic edge images.

use super::{prepare_dir, DiagnosticReport};
use crate::dualtree::{
    dtcwt2d_complex_forward, dtcwt2d_complex_inverse, dtcwt2d_real_forward, dtcwt2d_real_inverse, DualTreePyramidComplex2D,
    DualTreePyramidReal2D, Variant,
};
use crate::dwt2d::{dwt2d_forward, reconstruct_single_level};
use crate::error::{Error, Result};
use crate::filter::{DualTreeFilterSet, Filter};
use crate::io::write_csv;
use crate::signal::Image;
use std::collections::{BTreeMap, HashMap};
use std::path::Path;

/// A known discontinuity of a test image, in `(row, col)` pixel coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum EdgeGeometry {
    Segment { name: String, from: (f64, f64), to: (f64, f64) },
    Circle { name: String, center: (f64, f64), radius: f64 },
}

impl EdgeGeometry {
    pub fn name(&self) -> &str {
        match self {
            EdgeGeometry::Segment { name, .. } | EdgeGeometry::Circle { name, .. } => name,
        }
    }

    /// `(signed distance, position along the edge, edge length)` of a pixel.
    fn locate(&self, i: f64, j: f64) -> (f64, f64, f64) {
        match self {
            EdgeGeometry::Segment { from, to, .. } => {
                let (di, dj) = (to.0 - from.0, to.1 - from.1);
                let len = di.hypot(dj);
                let (ti, tj) = (di / len, dj / len);
                let (pi, pj) = (i - from.0, j - from.1);
                (pi * tj - pj * ti, pi * ti + pj * tj, len)
            }
            EdgeGeometry::Circle { center, radius, .. } => {
                let (pi, pj) = (i - center.0, j - center.1);
                let r = pi.hypot(pj);
                (r - radius, pj.atan2(pi) * radius, f64::INFINITY)
            }
        }
    }
}

/// Right isosceles triangle with legs along the axes, so its three edges
/// are horizontal, vertical and diagonal.
pub fn triangle_image(size: usize) -> (Image, Vec<EdgeGeometry>) {
    let a = size / 8;
    let l = 3 * size / 4;
    let img = Image::from_fn(size, size, |i, j| {
        if i >= a && j >= a && (i - a) + (j - a) <= l {
            1.0
        } else {
            0.0
        }
    });
    let (a, l) = (a as f64, l as f64);
    let corner = (a - 0.5, a - 0.5);
    let edges = vec![
        EdgeGeometry::Segment { name: "horizontal".into(), from: corner, to: (a - 0.5, a + l + 1.0) },
        EdgeGeometry::Segment { name: "vertical".into(), from: corner, to: (a + l + 1.0, a - 0.5) },
        EdgeGeometry::Segment { name: "diagonal".into(), from: (a - 0.5, a + l + 1.0), to: (a + l + 1.0, a - 0.5) },
    ];
    (img, edges)
}

/// Centred disk of radius `0.3 · size`.
pub fn disk_image(size: usize) -> (Image, Vec<EdgeGeometry>) {
    let c = (size as f64 - 1.0) / 2.0;
    let radius = 0.3 * size as f64;
    let img = Image::from_fn(size, size, |i, j| {
        if (i as f64 - c).hypot(j as f64 - c) <= radius {
            1.0
        } else {
            0.0
        }
    });
    (img, vec![EdgeGeometry::Circle { name: "disk".into(), center: (c, c), radius }])
}

/// Mean squared deviation of `y` within groups of pixels at equal signed
/// distance from `edge`, over pixels within `width` of the edge and at
/// least `margin` from its ends. Zero for a reconstruction that is
/// constant along the edge.
pub fn tangent_variance(y: &Image, edge: &EdgeGeometry, width: f64, margin: f64) -> f64 {
    let mut groups: HashMap<i64, Vec<f64>> = HashMap::new();
    for i in 0..y.rows() {
        for j in 0..y.cols() {
            let (d, t, len) = edge.locate(i as f64, j as f64);
            let away_from_ends = len.is_infinite() || (t >= margin && t <= len - margin);
            if d.abs() <= width && away_from_ends {
                groups.entry((d * 8.0).round() as i64).or_default().push(y.get(i, j));
            }
        }
    }
    let (mut dev, mut count) = (0.0, 0usize);
    for v in groups.values().filter(|v| v.len() > 1) {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        dev += v.iter().map(|x| (x - m).powi(2)).sum::<f64>();
        count += v.len();
    }
    if count == 0 {
        0.0
    } else {
        dev / count as f64
    }
}

/// Inverse of the dual-tree transform of `x` keeping only the `level`
/// details.
pub fn single_level_dtcwt(x: &Image, fs: &DualTreeFilterSet, variant: Variant, level: usize) -> Result<Image> {
    if level == 0 {
        return Err(Error::OutOfRange("level must be at least 1".into()));
    }
    let (r, c) = x.shape();
    match variant {
        Variant::Complex => {
            let p = dtcwt2d_complex_forward(x, fs, level)?;
            let mut q = DualTreePyramidComplex2D::zeros(r, c, level);
            q.details[level - 1] = p.details[level - 1].clone();
            dtcwt2d_complex_inverse(&q, fs)
        }
        Variant::Real => {
            let p = dtcwt2d_real_forward(x, fs, level)?;
            let mut q = DualTreePyramidReal2D::zeros(r, c, level);
            q.details[level - 1] = p.details[level - 1].clone();
            dtcwt2d_real_inverse(&q, fs)
        }
    }
}

/// Single-level reconstructions of `x` by the real DWT and the dual tree.
pub fn band_reconstructions(
    x: &Image,
    fs: &DualTreeFilterSet,
    filter: &Filter,
    variant: Variant,
    level: usize,
) -> Result<(Image, Image)> {
    let dwt = reconstruct_single_level(&dwt2d_forward(x, filter, level)?, filter, level)?;
    Ok((dwt, single_level_dtcwt(x, fs, variant, level)?))
}

/// `dwt_<edge>` and `dtcwt_<edge>` tangent variances of the level-`level`
/// reconstructions of `x`.
pub fn band_artifacts(
    x: &Image,
    edges: &[EdgeGeometry],
    fs: &DualTreeFilterSet,
    filter: &Filter,
    variant: Variant,
    level: usize,
) -> Result<BTreeMap<String, f64>> {
    let (dwt, dt) = band_reconstructions(x, fs, filter, variant, level)?;
    let s = (1usize << level) as f64;
    let mut out = BTreeMap::new();
    for e in edges {
        out.insert(format!("dwt_{}", e.name()), tangent_variance(&dwt, e, s, s));
        out.insert(format!("dtcwt_{}", e.name()), tangent_variance(&dt, e, s, s));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandReconConfig {
    pub size: usize,
    pub level: usize,
    pub variant: Variant,
}

impl Default for BandReconConfig {
    fn default() -> Self {
        BandReconConfig { size: 128, level: 4, variant: Variant::Complex }
    }
}

/// Triangle and disk images through [`band_artifacts`]. With `out`, writes
/// the inputs and reconstructions as CSV matrices.
pub fn diag_band_reconstruction(
    fs: &DualTreeFilterSet,
    filter: &Filter,
    cfg: &BandReconConfig,
    out: Option<&Path>,
) -> Result<DiagnosticReport> {
    crate::signal::check_dyadic(cfg.size, cfg.level, "image size")?;
    prepare_dir(out)?;
    let mut r = DiagnosticReport::new("band_recon");
    for (label, (img, edges)) in [("triangle", triangle_image(cfg.size)), ("disk", disk_image(cfg.size))] {
        for (k, v) in band_artifacts(&img, &edges, fs, filter, cfg.variant, cfg.level)? {
            r.set(&k, v)?;
        }
        if let Some(dir) = out {
            let (dwt, dt) = band_reconstructions(&img, fs, filter, cfg.variant, cfg.level)?;
            for (name, m) in [("input", &img), ("dwt", &dwt), ("dtcwt", &dt)] {
                let p = dir.join(format!("band_{label}_{name}.csv"));
                write_csv(m, &p)?;
                r.artifacts.push(p);
            }
        }
    }
    if let Some(dir) = out {
        r.write(dir)?;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn geometry() {
        let (img, edges) = triangle_image(128);
        assert_eq!(img.get(16, 16), 1.0);
        assert_eq!(img.get(15, 16), 0.0);
        assert_eq!(img.get(16, 112), 1.0);
        assert_eq!(img.get(16, 113), 0.0);
        // the diagonal edge passes half a pixel outside the last inside pixel
        let (d, t, len) = edges[2].locate(64.0, 64.0);
        assert!((d.abs() - 0.5 / 2f64.sqrt()).abs() < 1e-12, "{d}");
        assert!(t > 0.0 && t < len);
        let (d, ..) = edges[0].locate(20.0, 50.0);
        assert!((d.abs() - 4.5).abs() < 1e-12);
    }

    #[test]
    fn constant_along_edge_gives_zero() {
        let (_, edges) = triangle_image(64);
        let y = Image::from_fn(64, 64, |i, _| i as f64);
        assert!(tangent_variance(&y, &edges[0], 4.0, 4.0) < 1e-24);
        assert!(tangent_variance(&y, &edges[1], 4.0, 4.0) > 1.0);
    }

    #[test]
    fn blank_image() {
        let fs = fixtures::learned("complex").unwrap();
        let (_, edges) = triangle_image(64);
        let m = band_artifacts(&Image::zeros(64, 64), &edges, &fs, &fs.h1, Variant::Complex, 3).unwrap();
        assert_eq!(m.len(), 6);
        assert!(m.values().all(|v| *v == 0.0));
    }

    #[test]
    fn diagonal_edges_show_dwt_irregularities() {
        let fs = fixtures::learned("complex").unwrap();
        let r = diag_band_reconstruction(&fs, &fs.h1, &BandReconConfig::default(), None).unwrap();
        let m = |k: &str| r.metric(k).unwrap();
        assert!(m("dwt_horizontal") < m("dwt_diagonal"));
        assert!(m("dwt_vertical") < m("dwt_diagonal"));
        assert!(m("dtcwt_diagonal") < m("dwt_diagonal"));
    }

    #[test]
    fn divisibility() {
        let fs = DualTreeFilterSet::haar();
        let cfg = BandReconConfig { size: 72, ..BandReconConfig::default() };
        assert!(diag_band_reconstruction(&fs, &fs.h1, &cfg, None).is_err());
    }
}
