//! Reference filters shipped with the crate.
//!
//! Files are looked up in `$DTCWT_FIXTURES` first and fall back to copies
//! compiled into the binary.

use crate::error::{Error, Result};
use crate::filter::{DualTreeFilterSet, Filter};
use std::path::PathBuf;

pub const ENV_VAR: &str = "DTCWT_FIXTURES";

const BUILTIN: &[(&str, &str)] = &[
    ("haar", include_str!("../../../fixtures/haar.flt")),
    ("kingsbury_qshift_06", include_str!("../../../fixtures/kingsbury_qshift_06.flt")),
    ("kingsbury_qshift_a", include_str!("../../../fixtures/kingsbury_qshift_a.flt")),
    ("kingsbury_qshift_b", include_str!("../../../fixtures/kingsbury_qshift_b.flt")),
    ("kingsbury_qshift_d", include_str!("../../../fixtures/kingsbury_qshift_d.flt")),
    ("learned_complex14_h", include_str!("../../../fixtures/learned_complex14_h.flt")),
    ("learned_complex14_hfirst", include_str!("../../../fixtures/learned_complex14_hfirst.flt")),
    ("learned_complex18_h", include_str!("../../../fixtures/learned_complex18_h.flt")),
    ("learned_complex18_hfirst", include_str!("../../../fixtures/learned_complex18_hfirst.flt")),
    ("learned_complex_degen_b_h", include_str!("../../../fixtures/learned_complex_degen_b_h.flt")),
    ("learned_complex_degen_b_hfirst", include_str!("../../../fixtures/learned_complex_degen_b_hfirst.flt")),
    ("learned_complex_degen_d_h", include_str!("../../../fixtures/learned_complex_degen_d_h.flt")),
    ("learned_complex_degen_d_hfirst", include_str!("../../../fixtures/learned_complex_degen_d_hfirst.flt")),
    ("learned_complex_h", include_str!("../../../fixtures/learned_complex_h.flt")),
    ("learned_complex_hfirst", include_str!("../../../fixtures/learned_complex_hfirst.flt")),
    ("learned_real_degen_a_h", include_str!("../../../fixtures/learned_real_degen_a_h.flt")),
    ("learned_real_degen_a_hfirst", include_str!("../../../fixtures/learned_real_degen_a_hfirst.flt")),
    ("learned_real_degen_c_h", include_str!("../../../fixtures/learned_real_degen_c_h.flt")),
    ("learned_real_degen_c_hfirst", include_str!("../../../fixtures/learned_real_degen_c_hfirst.flt")),
    ("learned_real_h", include_str!("../../../fixtures/learned_real_h.flt")),
    ("learned_real_hfirst", include_str!("../../../fixtures/learned_real_hfirst.flt")),
];

/// Names of the compiled-in fixtures.
pub fn names() -> impl Iterator<Item = &'static str> {
    BUILTIN.iter().map(|(n, _)| *n)
}

/// Fixture directory from the environment, if set.
pub fn dir() -> Option<PathBuf> {
    std::env::var_os(ENV_VAR).map(PathBuf::from)
}

/// Compiled-in copy of fixture `name` (no `.flt` suffix).
pub fn builtin(name: &str) -> Result<Filter> {
    BUILTIN
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::Parse(format!("unknown fixture `{name}`")))?
        .1
        .parse()
}

/// Loads fixture `name`, preferring `$DTCWT_FIXTURES/<name>.flt`.
pub fn load(name: &str) -> Result<Filter> {
    load_from(dir().as_deref(), name)
}

/// Loads `<dir>/<name>.flt` when present, else the compiled-in copy.
pub fn load_from(dir: Option<&std::path::Path>, name: &str) -> Result<Filter> {
    if let Some(d) = dir {
        let p = d.join(format!("{name}.flt"));
        if p.exists() {
            return Filter::read(p);
        }
    }
    builtin(name)
}

/// The `(h, hfirst)` pair of a learned filter table, e.g. `"complex"`.
pub fn learned(model: &str) -> Result<DualTreeFilterSet> {
    Ok(DualTreeFilterSet::new(
        load(&format!("learned_{model}_h"))?,
        load(&format!("learned_{model}_hfirst"))?,
    ))
}
