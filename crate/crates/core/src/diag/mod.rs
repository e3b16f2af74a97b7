//! Diagnostics: shift variance, quantization aliasing, single-band
//! reconstruction, filter similarity and orientation of impulse responses.

mod alias;
mod bandrec;
mod compare;
mod orient;
mod shift;

pub use alias::{alias_energies, diag_aliasing, AliasConfig, AliasEnergies};
pub use bandrec::{
    band_reconstructions, tangent_variance,
    band_artifacts, diag_band_reconstruction, disk_image, single_level_dtcwt, triangle_image, BandReconConfig, EdgeGeometry,
};
pub use compare::compare_filters;
pub use orient::{distinct_angles, orientation_purity, spectral_orientation, Orientation};
pub use shift::{diag_shift_signal, diag_shift_variance, shift_deltas, step_edge, ShiftConfig, ShiftDeltas};

use crate::error::{Error, Result};
use crate::io::fmt_f64;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Outcome of a diagnostic that had no meaningful input, such as a zero
/// signal whose relative change is undefined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticReport {
    pub name: String,
    pub status: Status,
    pub metrics: BTreeMap<String, f64>,
    pub artifacts: Vec<PathBuf>,
}

impl DiagnosticReport {
    pub fn new(name: &str) -> Self {
        DiagnosticReport {
            name: name.to_string(),
            status: Status::Ok,
            metrics: BTreeMap::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn metric(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).copied()
    }

    pub(crate) fn set(&mut self, key: &str, v: f64) -> Result<()> {
        if !v.is_finite() {
            return Err(Error::NonFinite { node: self.metrics.len(), op: "metric" });
        }
        self.metrics.insert(key.to_string(), v);
        Ok(())
    }

    /// `metric,value` lines, with the status first.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("metric,value\n");
        let status = match self.status {
            Status::Ok => "ok",
            Status::Degenerate => "degenerate",
        };
        let _ = writeln!(s, "status,{status}");
        for (k, v) in &self.metrics {
            let _ = writeln!(s, "{k},{}", fmt_f64(*v));
        }
        s
    }

    /// Writes `<name>_report.csv` into `dir` and records it as an artifact.
    pub fn write(&mut self, dir: &Path) -> Result<PathBuf> {
        let p = dir.join(format!("{}_report.csv", self.name));
        self.artifacts.push(p.clone());
        std::fs::write(&p, self.to_csv()).map_err(|e| Error::io(&p, e))?;
        Ok(p)
    }
}

/// Neighbourhood of radius `r` samples around known discontinuities of a
/// periodic signal. `true` marks masked-out samples.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMask {
    pub mask: Vec<bool>,
}

impl EdgeMask {
    pub fn around(n: usize, edges: &[usize], r: usize) -> Self {
        let mut mask = vec![false; n];
        for &e in edges {
            for o in -(r as isize)..=r as isize {
                mask[(e as isize + o).rem_euclid(n as isize) as usize] = true;
            }
        }
        EdgeMask { mask }
    }

    /// Energy of `x` outside the mask.
    pub fn off_edge_energy(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.mask).filter(|(_, m)| !**m).map(|(v, _)| v * v).sum()
    }
}

pub(crate) fn prepare_dir(dir: Option<&Path>) -> Result<()> {
    if let Some(d) = dir {
        std::fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    Ok(())
}
