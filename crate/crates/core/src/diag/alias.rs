//! Artifacts of quantizing transform coefficients instead of samples.

use super::{prepare_dir, DiagnosticReport, EdgeMask};
use crate::dualtree::{dtcwt1d_forward, dtcwt1d_inverse, DualTreePyramid1D};
use crate::dwt1d::{dwt1d_forward, dwt1d_inverse, Pyramid1D};
use crate::error::Result;
use crate::filter::{DualTreeFilterSet, Filter};
use crate::io::write_columns;
use crate::multirate::quantize_uniform;
use crate::signal::Signal;
use std::f64::consts::TAU;
use std::path::Path;

/// Test signal `sin(2π·frequency·n/len)` plus a box of height one on
/// `[e, e + width)`. The box start `e` runs over `first_edge ..
/// first_edge + phases` and energies are summed over those placements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AliasConfig {
    pub len: usize,
    pub frequency: f64,
    pub width: usize,
    pub first_edge: usize,
    pub phases: usize,
    /// Mask radius around each box edge; `None` uses the filter length.
    pub radius: Option<usize>,
}

impl Default for AliasConfig {
    fn default() -> Self {
        AliasConfig { len: 128, frequency: 1.0, width: 48, first_edge: 32, phases: 8, radius: None }
    }
}

impl AliasConfig {
    pub fn signal(&self, edge: usize) -> Signal {
        let n = self.len as f64;
        Signal::new(
            (0..self.len)
                .map(|i| {
                    let inside = i >= edge && i < edge + self.width;
                    (TAU * self.frequency * i as f64 / n).sin() + if inside { 1.0 } else { 0.0 }
                })
                .collect(),
        )
        .expect("nonempty")
    }

    pub fn edges(&self, edge: usize) -> [usize; 2] {
        [edge, (edge + self.width) % self.len]
    }
}

/// Off-edge energy of the difference between coefficient-domain and
/// sample-domain quantization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AliasEnergies {
    pub dwt: f64,
    pub dtcwt: f64,
}

fn q(x: &[f64], levels: Option<usize>) -> Result<Vec<f64>> {
    match levels {
        Some(l) => quantize_uniform(x, l),
        None => Ok(x.to_vec()),
    }
}

fn quantize_pyramid(p: &Pyramid1D, levels: Option<usize>) -> Result<Pyramid1D> {
    Ok(Pyramid1D {
        approx: q(&p.approx, levels)?,
        details: p.details.iter().map(|d| q(d, levels)).collect::<Result<_>>()?,
    })
}

struct Pipelines {
    direct: Vec<f64>,
    dwt: Vec<f64>,
    dtcwt: Vec<f64>,
}

fn pipelines(x: &Signal, fs: &DualTreeFilterSet, filter: &Filter, levels: usize, qlevels: Option<usize>) -> Result<Pipelines> {
    let direct = q(x, qlevels)?;
    let p = quantize_pyramid(&dwt1d_forward(x, filter, levels)?, qlevels)?;
    let dwt = dwt1d_inverse(&p, filter)?.into_vec();
    let t = dtcwt1d_forward(x, fs, levels)?;
    let t = DualTreePyramid1D {
        trees: [quantize_pyramid(&t.trees[0], qlevels)?, quantize_pyramid(&t.trees[1], qlevels)?],
    };
    let dtcwt = dtcwt1d_inverse(&t, fs)?.into_vec();
    Ok(Pipelines { direct, dwt, dtcwt })
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Energies for one signal with the given mask. `qlevels = None` skips
/// quantization entirely.
pub fn alias_energies(
    x: &Signal,
    mask: &EdgeMask,
    fs: &DualTreeFilterSet,
    filter: &Filter,
    levels: usize,
    qlevels: Option<usize>,
) -> Result<AliasEnergies> {
    let p = pipelines(x, fs, filter, levels, qlevels)?;
    Ok(AliasEnergies {
        dwt: mask.off_edge_energy(&diff(&p.dwt, &p.direct)),
        dtcwt: mask.off_edge_energy(&diff(&p.dtcwt, &p.direct)),
    })
}

/// Real DWT with `filter` against the dual tree with `fs`.
///
/// Metrics: `energy_dwt`, `energy_dtcwt` and `ratio`. With `out`, writes
/// the signal and both reconstructions of the first placement.
pub fn diag_aliasing(
    fs: &DualTreeFilterSet,
    filter: &Filter,
    levels: usize,
    qlevels: Option<usize>,
    cfg: &AliasConfig,
    out: Option<&Path>,
) -> Result<DiagnosticReport> {
    crate::signal::check_dyadic(cfg.len, levels, "signal length")?;
    prepare_dir(out)?;
    let radius = cfg.radius.unwrap_or(filter.len());
    let mut total = AliasEnergies { dwt: 0.0, dtcwt: 0.0 };
    for e in cfg.first_edge..cfg.first_edge + cfg.phases.max(1) {
        let mask = EdgeMask::around(cfg.len, &cfg.edges(e), radius);
        let a = alias_energies(&cfg.signal(e), &mask, fs, filter, levels, qlevels)?;
        total.dwt += a.dwt;
        total.dtcwt += a.dtcwt;
    }
    let mut r = DiagnosticReport::new("alias");
    r.set("energy_dwt", total.dwt)?;
    r.set("energy_dtcwt", total.dtcwt)?;
    if total.dwt > 0.0 {
        r.set("ratio", total.dtcwt / total.dwt)?;
    }
    if let Some(dir) = out {
        let x = cfg.signal(cfg.first_edge);
        let p = pipelines(&x, fs, filter, levels, qlevels)?;
        let mask = EdgeMask::around(cfg.len, &cfg.edges(cfg.first_edge), radius);
        let m: Vec<f64> = mask.mask.iter().map(|b| if *b { 1.0 } else { 0.0 }).collect();
        let path = dir.join("alias_signals.csv");
        write_columns(
            &path,
            &["signal", "quantized", "dwt_quantized", "dtcwt_quantized", "edge_mask"],
            &[&x[..], &p.direct, &p.dwt, &p.dtcwt, &m],
        )?;
        r.artifacts.push(path);
        r.write(dir)?;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn no_quantization_is_exact_for_pr_filters() {
        let fs = DualTreeFilterSet::new(fixtures::load("kingsbury_qshift_a").unwrap(), Filter::haar_padded(10).unwrap());
        let r = diag_aliasing(&fs, &fs.h1, 3, None, &AliasConfig::default(), None).unwrap();
        assert!(r.metric("energy_dwt").unwrap() < 1e-18);
        assert!(r.metric("energy_dtcwt").unwrap() < 1e-18);
    }

    #[test]
    fn constant_signal_has_no_artifacts() {
        let fs = DualTreeFilterSet::haar();
        let x = Signal::new(vec![0.7; 64]).unwrap();
        let mask = EdgeMask::around(64, &[], 0);
        let a = alias_energies(&x, &mask, &fs, &fs.h1, 2, Some(9)).unwrap();
        assert!(a.dwt < 1e-25 && a.dtcwt < 1e-25, "{a:?}");
    }

    #[test]
    fn learned_complex_filters_reduce_artifacts() {
        let fs = fixtures::learned("complex").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let r = diag_aliasing(&fs, &fs.h1, 1, Some(9), &AliasConfig::default(), Some(dir.path())).unwrap();
        assert!(r.metric("ratio").unwrap() < 1.0);
        assert!(r.artifacts.iter().all(|p| p.exists()));
    }

    #[test]
    fn signal_layout() {
        let c = AliasConfig { frequency: 0.0, ..AliasConfig::default() };
        let x = c.signal(40);
        assert_eq!((x[39], x[40], x[87], x[88]), (0.0, 1.0, 1.0, 0.0));
        assert_eq!(c.edges(100), [100, 20]);
    }
}
