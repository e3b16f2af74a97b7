//! Change of level coefficients under a small translation of a step edge.

use super::{prepare_dir, DiagnosticReport, Status};
use crate::dualtree::dtcwt1d_forward;
use crate::dwt1d::dwt1d_forward;
use crate::error::Result;
use crate::filter::{DualTreeFilterSet, Filter};
use crate::io::write_columns;
use crate::signal::{norm, roll, Signal};
use std::path::Path;

/// Step-edge setup. The edge is placed at `edge, edge+1, ..` for
/// `phases` consecutive positions and the relative changes are averaged, so
/// the result does not hinge on where the edge falls relative to the
/// `2^level` decimation grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftConfig {
    pub len: usize,
    pub edge: usize,
    pub phases: usize,
    pub shift: isize,
}

impl Default for ShiftConfig {
    fn default() -> Self {
        ShiftConfig { len: 128, edge: 48, phases: 8, shift: 1 }
    }
}

/// `‖c_shift − c‖ / ‖c‖` for the real DWT detail and the dual-tree magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftDeltas {
    pub dwt: f64,
    pub dtcwt: f64,
}

/// Zero before `edge`, one from `edge` on.
pub fn step_edge(len: usize, edge: usize) -> Signal {
    Signal::new((0..len).map(|n| if n >= edge { 1.0 } else { 0.0 }).collect()).expect("nonempty")
}

/// `‖b − roll(a, lag)‖ / ‖a‖`.
fn rel_change(a: &[f64], b: &[f64], lag: isize) -> Option<f64> {
    let n = norm(a);
    let a = roll(a, lag);
    (n > 0.0).then(|| norm(&a.iter().zip(b).map(|(x, y)| y - x).collect::<Vec<_>>()) / n)
}

struct Coeffs {
    dwt: [Vec<f64>; 2],
    mag: [Vec<f64>; 2],
}

fn coeffs(x: &Signal, shift: isize, fs: &DualTreeFilterSet, filter: &Filter, level: usize) -> Result<Coeffs> {
    let xs = x.roll(shift);
    let d = |s: &Signal| -> Result<Vec<f64>> { Ok(dwt1d_forward(s, filter, level)?.detail(level).to_vec()) };
    let m = |s: &Signal| -> Result<Vec<f64>> { Ok(dtcwt1d_forward(s, fs, level)?.magnitude(level)) };
    Ok(Coeffs { dwt: [d(x)?, d(&xs)?], mag: [m(x)?, m(&xs)?] })
}

/// Relative coefficient changes of `x` under a circular shift. The
/// unshifted coefficients are first moved by the whole number of
/// coefficient periods in `shift`, so a shift by `2^level` compares
/// matching coefficients. `None` when the unshifted coefficients vanish.
pub fn shift_deltas(x: &Signal, shift: isize, fs: &DualTreeFilterSet, filter: &Filter, level: usize) -> Result<Option<ShiftDeltas>> {
    let c = coeffs(x, shift, fs, filter, level)?;
    let lag = shift.div_euclid(1 << level);
    Ok(rel_change(&c.dwt[0], &c.dwt[1], lag)
        .zip(rel_change(&c.mag[0], &c.mag[1], lag))
        .map(|(dwt, dtcwt)| ShiftDeltas { dwt, dtcwt }))
}

/// Real DWT with `filter` against the dual tree with `fs`, at `level`.
///
/// Metrics: `delta_dwt` and `delta_dtcwt` (means over edge phases),
/// `ratio`, and the per-phase values. With `out`, writes the signals and
/// coefficients of the first phase as CSV.
pub fn diag_shift_variance(
    fs: &DualTreeFilterSet,
    filter: &Filter,
    level: usize,
    cfg: &ShiftConfig,
    out: Option<&Path>,
) -> Result<DiagnosticReport> {
    crate::signal::check_dyadic(cfg.len, level, "signal length")?;
    prepare_dir(out)?;
    let mut r = DiagnosticReport::new("shift");
    let (mut sd, mut st) = (0.0, 0.0);
    for p in 0..cfg.phases.max(1) {
        let x = step_edge(cfg.len, cfg.edge + p);
        match shift_deltas(&x, cfg.shift, fs, filter, level)? {
            Some(d) => {
                r.set(&format!("delta_dwt_phase{p}"), d.dwt)?;
                r.set(&format!("delta_dtcwt_phase{p}"), d.dtcwt)?;
                sd += d.dwt;
                st += d.dtcwt;
            }
            None => {
                r.status = Status::Degenerate;
                return Ok(r);
            }
        }
    }
    let n = cfg.phases.max(1) as f64;
    r.set("delta_dwt", sd / n)?;
    r.set("delta_dtcwt", st / n)?;
    r.set("ratio", st / sd)?;
    if let Some(dir) = out {
        let x = step_edge(cfg.len, cfg.edge);
        let xs = x.roll(cfg.shift);
        let p = dir.join("shift_signal.csv");
        write_columns(&p, &["x", "x_shifted"], &[&x[..], &xs[..]])?;
        r.artifacts.push(p);
        let c = coeffs(&x, cfg.shift, fs, filter, level)?;
        let p = dir.join("shift_coefficients.csv");
        write_columns(
            &p,
            &["dwt", "dwt_shifted", "dtcwt_magnitude", "dtcwt_magnitude_shifted"],
            &[&c.dwt[0], &c.dwt[1], &c.mag[0], &c.mag[1]],
        )?;
        r.artifacts.push(p);
        r.write(dir)?;
    }
    Ok(r)
}

/// Report for an arbitrary signal; a vanishing coefficient set gives a
/// degenerate report.
pub fn diag_shift_signal(x: &Signal, shift: isize, fs: &DualTreeFilterSet, filter: &Filter, level: usize) -> Result<DiagnosticReport> {
    let mut r = DiagnosticReport::new("shift");
    match shift_deltas(x, shift, fs, filter, level)? {
        Some(d) => {
            r.set("delta_dwt", d.dwt)?;
            r.set("delta_dtcwt", d.dtcwt)?;
        }
        None => r.status = Status::Degenerate,
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn dyadic_shift_is_exact() {
        let fs = fixtures::learned("complex").unwrap();
        let x = step_edge(128, 50);
        for level in 1..=3 {
            let d = shift_deltas(&x, 1 << level, &fs, &fs.h1, level).unwrap().unwrap();
            assert!(d.dwt < 1e-10, "{level} {}", d.dwt);
            assert!(d.dtcwt < 1e-10);
        }
    }

    #[test]
    fn zero_signal_is_degenerate() {
        let fs = DualTreeFilterSet::haar();
        let r = diag_shift_signal(&Signal::zeros(64), 1, &fs, &fs.h1, 3).unwrap();
        assert_eq!(r.status, Status::Degenerate);
        assert!(r.metrics.is_empty());
    }

    #[test]
    fn single_sample_shift_changes_dwt() {
        let fs = fixtures::learned("complex").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let r = diag_shift_variance(&fs, &fs.h1, 3, &ShiftConfig::default(), Some(dir.path())).unwrap();
        assert_eq!(r.status, Status::Ok);
        assert!(r.metric("delta_dwt").unwrap() > 0.1);
        assert!(r.metric("ratio").unwrap() < 1.0);
        assert_eq!(r.artifacts.len(), 3);
        assert!(r.artifacts.iter().all(|p| p.exists()));
    }

    #[test]
    fn bad_length() {
        let fs = DualTreeFilterSet::haar();
        let cfg = ShiftConfig { len: 100, ..ShiftConfig::default() };
        assert!(diag_shift_variance(&fs, &fs.h1, 3, &cfg, None).is_err());
    }
}
