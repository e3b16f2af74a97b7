//! Adam training loop with checkpoints and a loss history.

use super::adam::Adam;
use super::config::TrainConfig;
use super::loss::{loss_and_gradient, LossReport};
use crate::error::{Error, Result};
use crate::filter::{DualTreeFilterSet, Filter};
use crate::io::fmt_f64;
use crate::signal::Image;
use rand::seq::SliceRandom;
use rand::Rng;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Header of the loss-history CSV.
pub const HISTORY_HEADER: &str = "step,total,reconstruction,sparsity,constraint,gaussian";

/// Filters and per-step losses of a finished run.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub filters: DualTreeFilterSet,
    pub history: Vec<LossReport>,
}

/// Padded Haar plus uniform noise of half-width `noise`, scaled to unit norm.
pub fn init_filter(k: usize, noise: f64, rng: &mut impl Rng) -> Result<Filter> {
    let base = Filter::haar_padded(k)?;
    let mut taps: Vec<f64> = base
        .taps()
        .iter()
        .map(|t| if noise > 0.0 { t + rng.gen_range(-noise..noise) } else { *t })
        .collect();
    let n = crate::signal::norm(&taps);
    taps.iter_mut().for_each(|t| *t /= n);
    Filter::new(taps)
}

/// Starting filters for `cfg`, drawn from its seed.
pub fn initial_filters(cfg: &TrainConfig) -> Result<DualTreeFilterSet> {
    let mut rng = super::rng(cfg.seed, 1);
    let h1 = init_filter(cfg.k, cfg.init_noise, &mut rng)?;
    let h1_first = init_filter(cfg.k_first, cfg.init_noise, &mut rng)?;
    Ok(DualTreeFilterSet::new(h1, h1_first))
}

/// Loss history as CSV text.
pub fn history_csv(history: &[LossReport]) -> String {
    let mut s = String::from(HISTORY_HEADER);
    s.push('\n');
    for (i, r) in history.iter().enumerate() {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            i + 1,
            fmt_f64(r.total),
            fmt_f64(r.reconstruction),
            fmt_f64(r.sparsity),
            fmt_f64(r.constraint),
            fmt_f64(r.gaussian)
        );
    }
    s
}

/// Paths of the checkpoint written into `dir`.
pub struct CheckpointPaths {
    pub h: PathBuf,
    pub h_first: PathBuf,
    pub meta: PathBuf,
}

impl CheckpointPaths {
    pub fn in_dir(dir: &Path) -> Self {
        CheckpointPaths {
            h: dir.join("checkpoint_h.flt"),
            h_first: dir.join("checkpoint_hfirst.flt"),
            meta: dir.join("checkpoint.meta"),
        }
    }
}

fn write_checkpoint(dir: &Path, fs: &DualTreeFilterSet, step: usize, report: Option<&LossReport>, cfg: &TrainConfig) -> Result<()> {
    let p = CheckpointPaths::in_dir(dir);
    fs.h1.write(&p.h)?;
    fs.h1_first.write(&p.h_first)?;
    let mut meta = format!("step = {step}\nseed = {}\nconfig_hash = {}\n", cfg.seed, cfg.hash());
    if let Some(r) = report {
        let _ = write!(
            meta,
            "total = {}\nreconstruction = {}\nsparsity = {}\nconstraint = {}\ngaussian = {}\n",
            fmt_f64(r.total),
            fmt_f64(r.reconstruction),
            fmt_f64(r.sparsity),
            fmt_f64(r.constraint),
            fmt_f64(r.gaussian)
        );
    }
    std::fs::write(&p.meta, meta).map_err(|e| Error::io(&p.meta, e))
}

fn write_history(dir: &Path, history: &[LossReport]) -> Result<()> {
    let p = dir.join("history.csv");
    std::fs::write(&p, history_csv(history)).map_err(|e| Error::io(&p, e))
}

/// Runs `cfg.steps` Adam steps on minibatches of `data` starting from `init`.
///
/// With `out_dir`, checkpoints and `history.csv` are written there. A
/// non-finite loss or gradient stops the run with [`Error::Diverged`],
/// leaving the last finite parameters as the checkpoint.
pub fn train_from(
    data: &[Image],
    cfg: &TrainConfig,
    init: DualTreeFilterSet,
    out_dir: Option<&Path>,
    mut progress: impl FnMut(usize, &LossReport),
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::InvalidLength("training set is empty".into()));
    }
    if let Some(d) = out_dir {
        std::fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    let obj = cfg.objective();
    let (k, kf) = (init.h1.len(), init.h1_first.len());
    let mut params: Vec<f64> = init.h1.taps().iter().chain(init.h1_first.taps()).copied().collect();
    let mut adam = Adam::new(params.len(), cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon);
    let mut order_rng = super::rng(cfg.seed, 2);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut cursor = data.len();
    let mut history = Vec::with_capacity(cfg.steps);
    let mut fs = init;
    let batch_size = cfg.batch_size.min(data.len());

    for step in 1..=cfg.steps {
        if cursor + batch_size > order.len() {
            order.shuffle(&mut order_rng);
            cursor = 0;
        }
        let batch: Vec<Image> = order[cursor..cursor + batch_size].iter().map(|&i| data[i].clone()).collect();
        cursor += batch_size;

        let evaluated = loss_and_gradient(&batch, &fs, &obj);
        let diverged = |reason: String| -> Result<TrainOutcome> {
            if let Some(d) = out_dir {
                write_checkpoint(d, &fs, step - 1, history.last(), cfg)?;
                write_history(d, &history)?;
            }
            Err(Error::Diverged { step, reason })
        };
        let (report, grad) = match evaluated {
            Ok(v) => v,
            Err(e @ Error::NonFinite { .. }) => return diverged(e.to_string()),
            Err(e) => return Err(e),
        };
        if !report.is_finite() {
            return diverged(format!("loss is {}", report.total));
        }
        let g: Vec<f64> = grad.h1.iter().chain(&grad.h1_first).copied().collect();
        let mut next = params.clone();
        adam.step(&mut next, &g);
        if next.iter().any(|v| !v.is_finite()) {
            return diverged("parameter update is not finite".into());
        }
        params = next;
        fs = DualTreeFilterSet::new(Filter::new(params[..k].to_vec())?, Filter::new(params[k..k + kf].to_vec())?);
        progress(step, &report);
        history.push(report);
        if let Some(d) = out_dir {
            if cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0 {
                write_checkpoint(d, &fs, step, Some(&report), cfg)?;
            }
        }
    }
    if let Some(d) = out_dir {
        write_checkpoint(d, &fs, cfg.steps, history.last(), cfg)?;
        write_history(d, &history)?;
        fs.h1.write(d.join("learned_h.flt"))?;
        fs.h1_first.write(d.join("learned_hfirst.flt"))?;
    }
    Ok(TrainOutcome { filters: fs, history })
}

/// [`train_from`] starting at [`initial_filters`].
pub fn train(data: &[Image], cfg: &TrainConfig, out_dir: Option<&Path>) -> Result<TrainOutcome> {
    train_from(data, cfg, initial_filters(cfg)?, out_dir, |_, _| {})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dualtree::Variant;
    use crate::learn::loss::{loss_wavelet_constraint, LossWeights};
    use crate::learn::synth::dataset;

    fn tiny(variant: Variant) -> TrainConfig {
        let mut c = TrainConfig::new(variant);
        c.steps = 12;
        c.batch_size = 4;
        c.images = 8;
        c.levels = 2;
        c.impulse_scale = 2;
        c.synth.size = 16;
        c.synth.harmonics = 3;
        c.synth.base_frequency = 4.0 * std::f64::consts::PI / 16.0;
        c.checkpoint_every = 5;
        c
    }

    #[test]
    fn init_is_unit_norm_near_haar() {
        let mut rng = crate::learn::rng(0, 1);
        let f = init_filter(10, 1e-2, &mut rng).unwrap();
        assert!((f.norm() - 1.0).abs() < 1e-15);
        assert!((f.taps()[4] - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.02);
        assert!(f.taps()[0].abs() < 0.011);
        assert_eq!(init_filter(4, 0.0, &mut rng).unwrap(), Filter::haar_padded(4).unwrap());
    }

    #[test]
    fn haar_start_stays_near_optimum() {
        let mut c = tiny(Variant::Complex);
        c.weights = LossWeights::new(0.0, 1.0, 0.0).unwrap();
        c.init_noise = 0.0;
        let data = dataset(&c.synth, c.images).unwrap();
        let out = train(&data, &c, None).unwrap();
        assert!(out.history[0].total < 1e-20);
        // Adam normalizes rounding-level gradients to steps of about lr
        for r in &out.history {
            assert!(r.total < 0.1 && r.constraint < 1e-5, "{r:?}");
        }
        assert!(loss_wavelet_constraint(&out.filters.h1) < 1e-5);
    }

    #[test]
    fn writes_artifacts_and_is_deterministic() {
        let c = tiny(Variant::Real);
        let data = dataset(&c.synth, c.images).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let a = train(&data, &c, Some(dir.path())).unwrap();
        let b = train(&data, &c, None).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.filters, b.filters);
        let hist = std::fs::read_to_string(dir.path().join("history.csv")).unwrap();
        assert!(hist.starts_with(HISTORY_HEADER));
        assert_eq!(hist.lines().count(), c.steps + 1);
        let p = CheckpointPaths::in_dir(dir.path());
        assert_eq!(Filter::read(&p.h).unwrap(), a.filters.h1);
        let meta = std::fs::read_to_string(&p.meta).unwrap();
        assert!(meta.contains(&format!("config_hash = {}", c.hash())));
        assert!(meta.contains("step = 12"));
    }

    #[test]
    fn divergence_keeps_last_finite_checkpoint() {
        let mut c = tiny(Variant::Complex);
        c.steps = 3;
        let mut data = dataset(&c.synth, 4).unwrap();
        for x in &mut data {
            x.set(0, 0, f64::INFINITY);
        }
        let dir = tempfile::tempdir().unwrap();
        let init = initial_filters(&c).unwrap();
        match train_from(&data, &c, init.clone(), Some(dir.path()), |_, _| {}) {
            Err(Error::Diverged { step, .. }) => assert_eq!(step, 1),
            other => panic!("{:?}", other.map(|o| o.history.len())),
        }
        let p = CheckpointPaths::in_dir(dir.path());
        assert_eq!(Filter::read(&p.h).unwrap(), init.h1);
    }
}
