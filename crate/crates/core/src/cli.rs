//! The `dtwave` command line.

use crate::diag::{
    self, orientation_purity, spectral_orientation, AliasConfig, BandReconConfig, DiagnosticReport, ShiftConfig,
};
use crate::dualtree::{
    dtcwt2d_complex_forward, dtcwt2d_complex_inverse, dtcwt2d_real_forward, dtcwt2d_real_inverse, DualTreePyramidComplex2D,
    DualTreePyramidReal2D, Variant,
};
use crate::dwt2d::{dwt2d_forward, dwt2d_inverse, Pyramid2D};
use crate::error::{Error, Result};
use crate::filter::{DualTreeFilterSet, Filter};
use crate::io::{read_image, write_csv, write_image, BandFile};
use crate::learn::{self, TrainConfig};
use crate::{fixtures, io};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "dtwave", version, about = "Dual-tree wavelet transforms and filter learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Forward transform of an image (.pgm or .csv) into a pyramid file
    Transform(TransformArgs),
    /// Inverse transform of a pyramid file
    Inverse(InverseArgs),
    /// Learn dual-tree filters on synthetic images
    Train(TrainArgs),
    /// Write synthetic training images as CSV
    GenData(GenDataArgs),
    /// Impulse responses of the six dual-tree bands
    Impulse(ImpulseArgs),
    /// Shift-variance, aliasing and single-band diagnostics
    #[command(subcommand)]
    Diagnose(Diagnose),
    /// Shift/sign/reversal-invariant distance between two filters
    CompareFilters(CompareArgs),
}

#[derive(Args, Debug, Clone)]
struct FilterArgs {
    /// Filter file, or the name of a bundled fixture (e.g. learned_complex_h)
    #[arg(long)]
    filter: String,
    /// First-level filter. Defaults to a sibling `*_hfirst.flt` of a
    /// `*_h.flt` filter when present, else the filter itself
    #[arg(long)]
    first: Option<String>,
}

#[derive(Copy, Clone, Debug, ValueEnum, PartialEq, Eq)]
enum Kind {
    Dwt,
    Real,
    Complex,
}

#[derive(Args, Debug)]
struct TransformArgs {
    #[command(flatten)]
    filters: FilterArgs,
    #[arg(long, default_value_t = 3)]
    levels: usize,
    #[arg(long, value_enum, default_value_t = Kind::Dwt)]
    kind: Kind,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct InverseArgs {
    #[command(flatten)]
    filters: FilterArgs,
    #[arg(long = "in")]
    input: PathBuf,
    /// Output image (.csv keeps full precision, .pgm stores raw values)
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// key = value configuration; defaults are used when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    variant: Option<VariantArg>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for checkpoints, history.csv and the learned filters
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    quiet: bool,
}

#[derive(Args, Debug)]
struct GenDataArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Copy, Clone, Debug, ValueEnum, PartialEq, Eq)]
enum VariantArg {
    Real,
    Complex,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Real => Variant::Real,
            VariantArg::Complex => Variant::Complex,
        }
    }
}

#[derive(Args, Debug)]
struct ImpulseArgs {
    #[command(flatten)]
    filters: FilterArgs,
    #[arg(long, value_enum, default_value_t = VariantArg::Complex)]
    variant: VariantArg,
    #[arg(long, default_value_t = 3)]
    scale: usize,
    /// Side of the response; defaults to filter length times 2^scale
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Diagnose {
    /// Coefficient change under a one-sample shift of a step edge
    Shift {
        #[command(flatten)]
        filters: FilterArgs,
        #[arg(long, default_value_t = 3)]
        level: usize,
        #[arg(long, default_value_t = 1)]
        shift: isize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Artifacts of quantizing coefficients to a few levels
    Alias {
        #[command(flatten)]
        filters: FilterArgs,
        #[arg(long, default_value_t = 1)]
        levels: usize,
        #[arg(long, default_value_t = 9)]
        qlevels: usize,
        /// Accepted for symmetry with band-recon; the 1D dual tree has a
        /// single form
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reconstruction from a single level of edge test images
    BandRecon {
        #[command(flatten)]
        filters: FilterArgs,
        #[arg(long, default_value_t = 4)]
        level: usize,
        #[arg(long, default_value_t = 128)]
        size: usize,
        #[arg(long, value_enum, default_value_t = VariantArg::Complex)]
        variant: VariantArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct CompareArgs {
    a: String,
    b: String,
}

fn load_filter(spec: &str) -> Result<Filter> {
    let p = Path::new(spec);
    if p.exists() {
        Filter::read(p)
    } else {
        fixtures::load(spec)
    }
}

fn sibling_first(spec: &str) -> Option<String> {
    let p = Path::new(spec);
    if p.exists() {
        let name = p.file_name()?.to_str()?;
        let stem = name.strip_suffix("_h.flt")?;
        let s = p.with_file_name(format!("{stem}_hfirst.flt"));
        s.exists().then(|| s.to_string_lossy().into_owned())
    } else {
        let stem = spec.strip_suffix("_h")?;
        let s = format!("{stem}_hfirst");
        fixtures::load(&s).is_ok().then_some(s)
    }
}

impl FilterArgs {
    fn set(&self) -> Result<DualTreeFilterSet> {
        let h = load_filter(&self.filter)?;
        let first = match self.first.clone().or_else(|| sibling_first(&self.filter)) {
            Some(f) => load_filter(&f)?,
            None => h.clone(),
        };
        Ok(DualTreeFilterSet::new(h, first))
    }
}

fn print(out: &mut dyn Write, s: &str) -> Result<()> {
    out.write_all(s.as_bytes()).map_err(|e| Error::io("<stdout>", e))
}

fn emit(report: &DiagnosticReport, out: &mut dyn Write) -> Result<()> {
    print(out, &report.to_csv())
}

fn transform(a: &TransformArgs) -> Result<()> {
    let x = read_image(&a.input)?;
    let fs = a.filters.set()?;
    let file = match a.kind {
        Kind::Dwt => dwt2d_forward(&x, &fs.h1, a.levels)?.to_band_file(),
        Kind::Real => dtcwt2d_real_forward(&x, &fs, a.levels)?.to_band_file(),
        Kind::Complex => dtcwt2d_complex_forward(&x, &fs, a.levels)?.to_band_file(),
    };
    file.write(&a.out)
}

fn inverse(a: &InverseArgs) -> Result<()> {
    let f = BandFile::read(&a.input)?;
    let fs = a.filters.set()?;
    let y = match f.get_field("trees") {
        None => dwt2d_inverse(&Pyramid2D::from_band_file(f)?, &fs.h1)?,
        Some("2") => dtcwt2d_real_inverse(&DualTreePyramidReal2D::from_band_file(f)?, &fs)?,
        Some("4") => dtcwt2d_complex_inverse(&DualTreePyramidComplex2D::from_band_file(f)?, &fs)?,
        Some(t) => return Err(Error::Parse(format!("unsupported tree count {t}"))),
    };
    write_image(&y, &a.out)
}

fn train_config(path: Option<&Path>, variant: Option<VariantArg>) -> Result<TrainConfig> {
    match path {
        Some(p) => TrainConfig::read(p),
        None => Ok(TrainConfig::new(variant.map_or(Variant::Complex, Into::into))),
    }
}

fn train(a: &TrainArgs, err: &mut dyn Write) -> Result<()> {
    let mut cfg = train_config(a.config.as_deref(), a.variant)?;
    if let Some(v) = a.variant {
        if a.config.is_some() && Variant::from(v) != cfg.variant {
            return Err(Error::OutOfRange("--variant disagrees with the config file".into()));
        }
    }
    if let Some(s) = a.steps {
        cfg.steps = s;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    cfg.write(a.out.join("config.txt"))?;
    let data = learn::dataset(&cfg.synth, cfg.images)?;
    let every = cfg.checkpoint_every.max(1);
    let quiet = a.quiet;
    let out = learn::train_from(&data, &cfg, learn::initial_filters(&cfg)?, Some(&a.out), |step, r| {
        if !quiet && (step == 1 || step % every == 0) {
            let _ = writeln!(err, "step {step} loss {:.6e}", r.total);
        }
    })?;
    if let Some(last) = out.history.last() {
        let _ = writeln!(err, "done: {} steps, final loss {:.6e}", out.history.len(), last.total);
    }
    Ok(())
}

fn gen_data(a: &GenDataArgs) -> Result<()> {
    let mut cfg = train_config(a.config.as_deref(), None)?;
    if let Some(s) = a.size {
        cfg.synth = learn::SynthConfig { size: s, ..learn::SynthConfig::new(s, cfg.synth.seed) };
    }
    if let Some(s) = a.seed {
        cfg.synth.seed = s;
    }
    let count = a.count.unwrap_or(cfg.images);
    let data = learn::dataset(&cfg.synth, count)?;
    for (i, x) in data.iter().enumerate() {
        write_csv(x, a.out.join(format!("image_{i:04}.csv")))?;
    }
    Ok(())
}

fn impulse(a: &ImpulseArgs, out: &mut dyn Write) -> Result<()> {
    let fs = a.filters.set()?;
    let variant: Variant = a.variant.into();
    let size = a.size.unwrap_or(learn::loss::impulse_size(fs.h1.len(), a.scale, None));
    let mut r = DiagnosticReport::new("impulse");
    if let Some(d) = &a.out {
        std::fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    for b in 1..=6 {
        let resp = learn::impulse_response(&fs, b, a.scale, variant, size)?;
        let m = resp.magnitude();
        if let Ok(o) = orientation_purity(&m) {
            r.set(&format!("band{b}_angle"), o.angle)?;
            r.set(&format!("band{b}_purity"), o.purity)?;
        }
        if let Ok(o) = spectral_orientation(&resp.re) {
            r.set(&format!("band{b}_spectral_angle"), o.angle)?;
            r.set(&format!("band{b}_spectral_purity"), o.purity)?;
        }
        if let Some(d) = &a.out {
            let mut parts = vec![("re", &resp.re), ("magnitude", &m)];
            if let Some(im) = &resp.im {
                parts.push(("im", im));
            }
            for (name, img) in parts {
                let p = d.join(format!("band{b}_{name}.csv"));
                write_csv(img, &p)?;
                r.artifacts.push(p);
            }
        }
    }
    if let Some(d) = &a.out {
        r.write(d)?;
    }
    emit(&r, out)
}

fn diagnose(d: &Diagnose, out: &mut dyn Write) -> Result<()> {
    let r = match d {
        Diagnose::Shift { filters, level, shift, out: dir } => {
            let fs = filters.set()?;
            let cfg = ShiftConfig { shift: *shift, ..ShiftConfig::default() };
            diag::diag_shift_variance(&fs, &fs.h1, *level, &cfg, dir.as_deref())?
        }
        Diagnose::Alias { filters, levels, qlevels, out: dir, .. } => {
            let fs = filters.set()?;
            diag::diag_aliasing(&fs, &fs.h1, *levels, Some(*qlevels), &AliasConfig::default(), dir.as_deref())?
        }
        Diagnose::BandRecon { filters, level, size, variant, out: dir } => {
            let fs = filters.set()?;
            let cfg = BandReconConfig { size: *size, level: *level, variant: (*variant).into() };
            diag::diag_band_reconstruction(&fs, &fs.h1, &cfg, dir.as_deref())?
        }
    };
    emit(&r, out)
}

fn compare(a: &CompareArgs, out: &mut dyn Write) -> Result<()> {
    let d = diag::compare_filters(&load_filter(&a.a)?, &load_filter(&a.b)?)?;
    print(out, &format!("{}\n", io::fmt_f64(d)))
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } => EXIT_USAGE,
        _ => EXIT_NUMERIC,
    }
}

/// Runs the CLI on `args` (including the program name), writing normal
/// output to `out` and messages to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Transform(a) => transform(a),
        Command::Inverse(a) => inverse(a),
        Command::Train(a) => train(a, err),
        Command::GenData(a) => gen_data(a),
        Command::Impulse(a) => impulse(a, out),
        Command::Diagnose(d) => diagnose(d, out),
        Command::CompareFilters(a) => compare(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("dtwave").chain(args.iter().copied()), &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn usage_errors() {
        assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(call(&[]).0, EXIT_USAGE);
        let (code, out, _) = call(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("transform"));
    }

    #[test]
    fn compare_fixtures() {
        let (code, out, _) = call(&["compare-filters", "haar", "haar"]);
        assert_eq!(code, 0);
        assert_eq!(out.trim().parse::<f64>().unwrap(), 0.0);
    }

    #[test]
    fn sibling_first_level_filter() {
        assert_eq!(sibling_first("learned_complex_h").as_deref(), Some("learned_complex_hfirst"));
        assert_eq!(sibling_first("haar"), None);
    }

    #[test]
    fn numeric_failure() {
        let (code, _, err) = call(&["diagnose", "band-recon", "--filter", "haar", "--size", "72"]);
        assert_eq!(code, EXIT_NUMERIC, "{err}");
    }
}
