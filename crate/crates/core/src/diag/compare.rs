//! Shift-, sign- and reversal-invariant distance between filters.

use crate::error::{Error, Result};
use crate::filter::Filter;
use crate::signal::{dot, norm, roll};

/// `1 − max |⟨ρ(shift(f, s)), ref⟩| / (‖f‖ ‖ref‖)` over circular shifts `s`
/// and `ρ ∈ {identity, reversal}`, after zero-padding the shorter filter.
pub fn compare_filters(f: &Filter, reference: &Filter) -> Result<f64> {
    let n = f.len().max(reference.len());
    let pad = |t: &[f64]| {
        let mut v = t.to_vec();
        v.resize(n, 0.0);
        v
    };
    let (a, b) = (pad(f.taps()), pad(reference.taps()));
    let scale = norm(&a) * norm(&b);
    if scale == 0.0 {
        return Err(Error::Undefined("distance to a zero filter".into()));
    }
    let rev: Vec<f64> = a.iter().rev().copied().collect();
    let mut best = 0.0f64;
    for v in [&a, &rev] {
        for s in 0..n as isize {
            best = best.max(dot(&roll(v, s), &b).abs());
        }
    }
    Ok((1.0 - best / scale).clamp(0.0, 1.0))
}
