//! Loss terms and their gradients.

use super::graph::{self, DualTape, FilterVars};
use super::tape::{Tape, Var};
use crate::dualtree::{
    check_band, dtcwt2d_complex_inverse, dtcwt2d_real_inverse, DualTreePyramidComplex2D,
    DualTreePyramidReal2D, Variant,
};
use crate::error::{Error, Result};
use crate::filter::{DualTreeFilterSet, Filter};
use crate::signal::Image;
use rayon::prelude::*;

/// Weights of the sparsity, filter-constraint and impulse-response terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
}

impl LossWeights {
    pub fn new(lambda1: f64, lambda2: f64, lambda3: f64) -> Result<Self> {
        for (n, v) in [("lambda1", lambda1), ("lambda2", lambda2), ("lambda3", lambda3)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::OutOfRange(format!("{n} must be finite and non-negative, got {v}")));
            }
        }
        Ok(LossWeights { lambda1, lambda2, lambda3 })
    }

    /// `λ1 = 0.1`, `λ2 = 1`, and `λ3 = 4e-4` (complex) or `4e-5` (real).
    pub fn defaults(variant: Variant) -> Self {
        LossWeights {
            lambda1: 0.1,
            lambda2: 1.0,
            lambda3: match variant {
                Variant::Complex => 4e-4,
                Variant::Real => 4e-5,
            },
        }
    }
}

/// `G[i, j] = α · exp(−((i − c)² + (j − c)²) / 2σ²)` with `c = (size − 1)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianTarget {
    pub alpha: f64,
    pub sigma: f64,
    pub size: usize,
}

impl GaussianTarget {
    pub fn new(alpha: f64, sigma: f64, size: usize) -> Self {
        GaussianTarget { alpha, sigma, size }
    }

    pub fn center(&self) -> (f64, f64) {
        let c = (self.size as f64 - 1.0) / 2.0;
        (c, c)
    }

    pub fn matrix(&self) -> Image {
        let (ci, cj) = self.center();
        let s2 = 2.0 * self.sigma * self.sigma;
        Image::from_fn(self.size, self.size, |i, j| {
            let (di, dj) = (i as f64 - ci, j as f64 - cj);
            self.alpha * (-(di * di + dj * dj) / s2).exp()
        })
    }
}

/// Per-term values of the objective for one batch. Terms are unweighted;
/// `total` applies the weights.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossReport {
    pub total: f64,
    pub reconstruction: f64,
    pub sparsity: f64,
    pub constraint: f64,
    pub gaussian: f64,
}

impl LossReport {
    pub fn is_finite(&self) -> bool {
        [self.total, self.reconstruction, self.sparsity, self.constraint, self.gaussian]
            .iter()
            .all(|v| v.is_finite())
    }
}

/// `(‖h‖ − 1)² + (μ_h − √2/k)² + μ_g²`.
pub fn loss_wavelet_constraint(h: &Filter) -> f64 {
    let k = h.len() as f64;
    let mu_g = h.wavelet().mean();
    (h.norm() - 1.0).powi(2) + (h.mean() - 2f64.sqrt() / k).powi(2) + mu_g * mu_g
}

fn constraint_on_tape(t: &mut Tape, h: Var) -> Var {
    let k = t.value(h).len() as f64;
    let n = t.norm(h);
    let n1 = t.offset(n, -1.0);
    let a = t.square(n1);
    let m = t.mean(h);
    let m1 = t.offset(m, -(2f64.sqrt() / k));
    let b = t.square(m1);
    let g = t.mirror(h);
    let mg = t.mean(g);
    let c = t.square(mg);
    t.add_all(&[a, b, c])
}

/// Side of the square impulse response at `scale`: `k · 2^scale`, clipped
/// to `limit` when given.
pub fn impulse_size(k: usize, scale: usize, limit: Option<usize>) -> usize {
    let s = k << scale;
    limit.map_or(s, |l| s.min(l))
}

/// Spatial response of one band: real part, and imaginary part for the
/// complex transform.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseResponse {
    pub re: Image,
    pub im: Option<Image>,
}

impl ImpulseResponse {
    /// `re² + im²`.
    pub fn magnitude(&self) -> Image {
        let mut m = self.re.map(|v| v * v);
        if let Some(im) = &self.im {
            for (o, v) in m.data_mut().iter_mut().zip(im.data()) {
                *o += v * v;
            }
        }
        m
    }
}

fn check_impulse(band: usize, scale: usize, size: usize) -> Result<()> {
    check_band(band)?;
    if scale == 0 {
        return Err(Error::OutOfRange("scale must be at least 1".into()));
    }
    if scale >= usize::BITS as usize || !size.is_multiple_of(1 << scale) || size >> scale == 0 {
        return Err(Error::InvalidLength(format!(
            "impulse size {size} is not divisible by 2^{scale}"
        )));
    }
    Ok(())
}

/// Inverse of a `size x size` pyramid holding one unit coefficient at the
/// centre of `band` (1..=6) at `scale`.
pub fn impulse_response(
    fs: &DualTreeFilterSet,
    band: usize,
    scale: usize,
    variant: Variant,
    size: usize,
) -> Result<ImpulseResponse> {
    check_impulse(band, scale, size)?;
    let c = (size >> scale) / 2;
    match variant {
        Variant::Real => {
            let mut p = DualTreePyramidReal2D::zeros(size, size, scale);
            p.band_mut(scale, band).set(c, c, 1.0);
            Ok(ImpulseResponse { re: dtcwt2d_real_inverse(&p, fs)?, im: None })
        }
        Variant::Complex => {
            let mut p = DualTreePyramidComplex2D::zeros(size, size, scale);
            p.band_mut(scale, band).re.set(c, c, 1.0);
            let re = dtcwt2d_complex_inverse(&p, fs)?;
            let mut p = DualTreePyramidComplex2D::zeros(size, size, scale);
            p.band_mut(scale, band).im.set(c, c, 1.0);
            let im = dtcwt2d_complex_inverse(&p, fs)?;
            Ok(ImpulseResponse { re, im: Some(im) })
        }
    }
}

fn impulse_on_tape(t: &mut Tape, fv: &FilterVars, band: usize, scale: usize, variant: Variant, size: usize) -> Var {
    let c = (size >> scale) / 2;
    let side = size >> scale;
    let mut unit = vec![0.0; side * side];
    unit[c * side + c] = 1.0;
    let response = |t: &mut Tape, slot: (usize, usize)| {
        let mut p = DualTape::zeros(t, variant, size, size, scale);
        p.groups[scale - 1][slot.0][slot.1] = t.leaf(unit.clone());
        graph::inverse(t, fv, &p, variant)
    };
    let re = response(t, DualTape::real_slot(band));
    let re2 = t.square(re);
    match variant {
        Variant::Real => re2,
        Variant::Complex => {
            let im = response(t, DualTape::imag_slot(band));
            let im2 = t.square(im);
            t.add(re2, im2)
        }
    }
}

fn gaussian_on_tape(t: &mut Tape, fv: &FilterVars, target: &GaussianTarget, scale: usize, variant: Variant) -> Var {
    let g = t.image(&target.matrix());
    let terms: Vec<Var> = (1..=6)
        .map(|b| {
            let m = impulse_on_tape(t, fv, b, scale, variant, target.size);
            let d = t.sub(g, m);
            t.sum_sq(d)
        })
        .collect();
    t.add_all(&terms)
}

/// `Σ_bands ‖G − M_band‖²`.
pub fn loss_gaussian_impulse(fs: &DualTreeFilterSet, target: &GaussianTarget, scale: usize, variant: Variant) -> Result<f64> {
    let g = target.matrix();
    let mut total = 0.0;
    for b in 1..=6 {
        let m = impulse_response(fs, b, scale, variant, target.size)?.magnitude();
        total += g.sub(&m).energy();
    }
    Ok(total)
}

/// Everything that defines the training objective apart from the data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objective {
    pub variant: Variant,
    pub levels: usize,
    pub impulse_scale: usize,
    pub weights: LossWeights,
    pub target: GaussianTarget,
}

impl Objective {
    /// Default objective for a `size x size` training set with `k`-tap filters.
    pub fn standard(variant: Variant, k: usize, size: usize) -> Self {
        let scale = 4;
        Objective {
            variant,
            levels: 4,
            impulse_scale: scale,
            weights: LossWeights::defaults(variant),
            target: GaussianTarget::new(0.02, 10.0, impulse_size(k, scale, Some(size))),
        }
    }

    fn check(&self, batch: &[Image]) -> Result<()> {
        if batch.is_empty() {
            return Err(Error::InvalidLength("batch is empty".into()));
        }
        let shape = batch[0].shape();
        if batch.iter().any(|x| x.shape() != shape) {
            return Err(Error::InvalidLength("batch images differ in shape".into()));
        }
        crate::signal::check_dyadic(shape.0, self.levels, "image height")?;
        crate::signal::check_dyadic(shape.1, self.levels, "image width")?;
        check_impulse(1, self.impulse_scale, self.target.size)
    }
}

/// Gradients of the total loss with respect to the two learnable filters.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterGradient {
    pub h1: Vec<f64>,
    pub h1_first: Vec<f64>,
}

struct ImageTerms {
    reconstruction: f64,
    sparsity: f64,
    h1: Vec<f64>,
    h1_first: Vec<f64>,
}

fn image_terms(x: &Image, fs: &DualTreeFilterSet, obj: &Objective, grad: bool) -> Result<ImageTerms> {
    let mut t = Tape::new();
    let fv = FilterVars::new(&mut t, fs);
    let xv = t.image(x);
    let p = graph::forward(&mut t, &fv, xv, x.rows(), x.cols(), obj.levels, obj.variant);
    let y = graph::inverse(&mut t, &fv, &p, obj.variant);
    let e = t.sub(y, xv);
    let rec = t.sum_sq(e);
    let l1: Vec<Var> = p.details().collect::<Vec<_>>().into_iter().map(|d| t.abs_sum(d)).collect();
    let sp = t.add_all(&l1);
    let weighted = t.scale(sp, obj.weights.lambda1);
    let out = t.add(rec, weighted);
    let (reconstruction, sparsity) = (t.scalar(rec), t.scalar(sp));
    if !grad {
        t.check_finite()?;
        return Ok(ImageTerms { reconstruction, sparsity, h1: vec![], h1_first: vec![] });
    }
    let g = t.backward(out)?;
    Ok(ImageTerms {
        reconstruction,
        sparsity,
        h1: g.wrt(fv.h1).to_vec(),
        h1_first: g.wrt(fv.h1_first).to_vec(),
    })
}

struct FilterTerms {
    constraint: f64,
    gaussian: f64,
    h1: Vec<f64>,
    h1_first: Vec<f64>,
}

fn filter_terms(fs: &DualTreeFilterSet, obj: &Objective, grad: bool) -> Result<FilterTerms> {
    let mut t = Tape::new();
    let fv = FilterVars::new(&mut t, fs);
    let c1 = constraint_on_tape(&mut t, fv.h1);
    let c2 = constraint_on_tape(&mut t, fv.h1_first);
    let c = t.add(c1, c2);
    let wc = t.scale(c, obj.weights.lambda2);
    let (out, gaussian) = if obj.weights.lambda3 > 0.0 {
        let lg = gaussian_on_tape(&mut t, &fv, &obj.target, obj.impulse_scale, obj.variant);
        let wg = t.scale(lg, obj.weights.lambda3);
        (t.add(wc, wg), t.scalar(lg))
    } else {
        (wc, loss_gaussian_impulse(fs, &obj.target, obj.impulse_scale, obj.variant)?)
    };
    let constraint = t.scalar(c);
    if !grad {
        t.check_finite()?;
        return Ok(FilterTerms { constraint, gaussian, h1: vec![], h1_first: vec![] });
    }
    let g = t.backward(out)?;
    Ok(FilterTerms {
        constraint,
        gaussian,
        h1: g.wrt(fv.h1).to_vec(),
        h1_first: g.wrt(fv.h1_first).to_vec(),
    })
}

fn evaluate(batch: &[Image], fs: &DualTreeFilterSet, obj: &Objective, grad: bool) -> Result<(LossReport, FilterGradient)> {
    obj.check(batch)?;
    // one tape per image; results are reduced in batch order
    let per_image: Vec<ImageTerms> = batch
        .par_iter()
        .map(|x| image_terms(x, fs, obj, grad))
        .collect::<Result<_>>()?;
    let ft = filter_terms(fs, obj, grad)?;
    let m = batch.len() as f64;
    let mut report = LossReport {
        constraint: ft.constraint,
        gaussian: ft.gaussian,
        ..LossReport::default()
    };
    let mut gh = ft.h1;
    let mut gf = ft.h1_first;
    for it in &per_image {
        report.reconstruction += it.reconstruction;
        report.sparsity += it.sparsity;
        for (d, s) in gh.iter_mut().zip(&it.h1) {
            *d += s / m;
        }
        for (d, s) in gf.iter_mut().zip(&it.h1_first) {
            *d += s / m;
        }
    }
    report.reconstruction /= m;
    report.sparsity /= m;
    let w = obj.weights;
    let lg = if w.lambda3 > 0.0 { w.lambda3 * report.gaussian } else { 0.0 };
    report.total = report.reconstruction + w.lambda1 * report.sparsity + w.lambda2 * report.constraint + lg;
    Ok((report, FilterGradient { h1: gh, h1_first: gf }))
}

/// Evaluates every term of the objective on `batch`.
pub fn total_loss(batch: &[Image], fs: &DualTreeFilterSet, obj: &Objective) -> Result<LossReport> {
    Ok(evaluate(batch, fs, obj, false)?.0)
}

/// Loss report together with exact reverse-mode gradients.
pub fn loss_and_gradient(batch: &[Image], fs: &DualTreeFilterSet, obj: &Objective) -> Result<(LossReport, FilterGradient)> {
    evaluate(batch, fs, obj, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn batch(n: usize, size: usize, seed: u64) -> Vec<Image> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| Image::from_fn(size, size, |_, _| rng.gen_range(-1.0..1.0))).collect()
    }

    fn small(variant: Variant) -> Objective {
        Objective {
            variant,
            levels: 2,
            impulse_scale: 2,
            weights: LossWeights::defaults(variant),
            target: GaussianTarget::new(0.02, 10.0, 16),
        }
    }

    #[test]
    fn constraint_examples() {
        assert_eq!(loss_wavelet_constraint(&Filter::haar()), 0.0);
        for k in [2usize, 4, 10] {
            let z = Filter::new(vec![0.0; k]).unwrap();
            let want = 1.0 + 2.0 / (k * k) as f64;
            assert!((loss_wavelet_constraint(&z) - want).abs() < 1e-15);
        }
        let h = fixtures::builtin("learned_complex_h").unwrap();
        assert!(loss_wavelet_constraint(&h) < 5e-3);
    }

    #[test]
    fn gaussian_target_shape() {
        let g = GaussianTarget::new(0.02, 10.0, 64).matrix();
        assert_eq!(g.shape(), (64, 64));
        assert!((g.get(31, 31) - g.get(32, 32)).abs() < 1e-15);
        assert!(g.get(31, 31) < 0.02 && g.get(31, 31) > 0.0199);
        assert_eq!(impulse_size(10, 4, Some(64)), 64);
        assert_eq!(impulse_size(10, 3, None), 80);
    }

    #[test]
    fn impulse_errors() {
        let fs = fixtures::learned("complex").unwrap();
        assert!(impulse_response(&fs, 0, 2, Variant::Complex, 16).is_err());
        assert!(impulse_response(&fs, 7, 2, Variant::Complex, 16).is_err());
        assert!(impulse_response(&fs, 1, 0, Variant::Complex, 16).is_err());
        assert!(impulse_response(&fs, 1, 3, Variant::Complex, 20).is_err());
    }

    #[test]
    fn identical_trees_have_silent_second_group() {
        let fs = DualTreeFilterSet::new(Filter::new(vec![0.1, 0.6, 0.6, 0.1]).unwrap(), Filter::haar());
        for b in 4..=6 {
            let r = impulse_response(&fs, b, 2, Variant::Real, 16).unwrap();
            assert!(r.re.data().iter().all(|&v| v == 0.0));
        }
        assert!(impulse_response(&fs, 1, 2, Variant::Real, 16).unwrap().re.energy() > 0.0);
    }

    #[test]
    fn gaussian_loss_closed_forms() {
        // all-zero filters give all-zero responses
        let fs = DualTreeFilterSet::new(Filter::new(vec![0.0; 4]).unwrap(), Filter::new(vec![0.0; 4]).unwrap());
        let t = GaussianTarget::new(0.02, 10.0, 16);
        let l = loss_gaussian_impulse(&fs, &t, 2, Variant::Complex).unwrap();
        assert!((l - 6.0 * t.matrix().energy()).abs() < 1e-15);
        // a target equal to the response magnitude leaves only the other bands
        let fs = fixtures::learned("complex").unwrap();
        let m = impulse_response(&fs, 1, 2, Variant::Complex, 16).unwrap().magnitude();
        assert!(m.data().iter().all(|&v| v >= 0.0));
        assert_eq!(m.sub(&m).energy(), 0.0);
        assert!(loss_gaussian_impulse(&fs, &t, 2, Variant::Complex).unwrap() >= 0.0);
    }

    #[test]
    fn tape_gaussian_matches_plain() {
        let fs = fixtures::learned("complex").unwrap();
        for variant in [Variant::Complex, Variant::Real] {
            let obj = small(variant);
            let ft = filter_terms(&fs, &obj, false).unwrap();
            let plain = loss_gaussian_impulse(&fs, &obj.target, 2, variant).unwrap();
            assert!((ft.gaussian - plain).abs() < 1e-12 * plain);
            let c = loss_wavelet_constraint(&fs.h1) + loss_wavelet_constraint(&fs.h1_first);
            assert!((ft.constraint - c).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_weights_with_exact_filters() {
        let fs = DualTreeFilterSet::new(
            fixtures::builtin("kingsbury_qshift_a").unwrap(),
            fixtures::builtin("kingsbury_qshift_06").unwrap(),
        );
        let mut obj = small(Variant::Complex);
        obj.weights = LossWeights::new(0.0, 0.0, 0.0).unwrap();
        let r = total_loss(&batch(2, 16, 1), &fs, &obj).unwrap();
        assert!(r.total < 1e-20, "{}", r.total);
        assert_eq!(r.total, r.reconstruction);
    }

    #[test]
    fn zero_image_leaves_filter_terms() {
        let fs = DualTreeFilterSet::haar();
        let obj = small(Variant::Complex);
        let r = total_loss(&[Image::zeros(16, 16)], &fs, &obj).unwrap();
        assert_eq!(r.reconstruction, 0.0);
        assert_eq!(r.sparsity, 0.0);
        assert_eq!(r.constraint, 0.0);
        assert!((r.total - obj.weights.lambda3 * r.gaussian).abs() < 1e-18);
    }

    #[test]
    fn default_weights() {
        let w = LossWeights::defaults(Variant::Complex);
        assert_eq!((w.lambda1, w.lambda2, w.lambda3), (0.1, 1.0, 4e-4));
        assert_eq!(LossWeights::defaults(Variant::Real).lambda3, 4e-5);
        assert!(LossWeights::new(-1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn constraint_gradient_vanishes_at_haar() {
        let mut obj = small(Variant::Complex);
        obj.weights = LossWeights::new(0.0, 1.0, 0.0).unwrap();
        let ft = filter_terms(&DualTreeFilterSet::haar(), &obj, true).unwrap();
        assert!(ft.h1.iter().chain(&ft.h1_first).all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn non_finite_input_is_reported() {
        let fs = fixtures::learned("complex").unwrap();
        let mut x = Image::zeros(16, 16);
        x.set(3, 3, f64::NAN);
        match loss_and_gradient(&[x], &fs, &small(Variant::Complex)) {
            Err(Error::NonFinite { op, .. }) => assert_eq!(op, "leaf"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gradient_matches_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let jitter = |f: &Filter, rng: &mut ChaCha8Rng| {
            Filter::new(f.taps().iter().map(|v| v + rng.gen_range(-0.05..0.05)).collect()).unwrap()
        };
        let base = fixtures::learned("complex").unwrap();
        let fs = DualTreeFilterSet::new(jitter(&base.h1, &mut rng), jitter(&base.h1_first, &mut rng));
        let data = batch(2, 16, 5);
        for variant in [Variant::Complex, Variant::Real] {
            let obj = small(variant);
            let (_, g) = loss_and_gradient(&data, &fs, &obj).unwrap();
            let eps = 1e-6;
            for which in 0..2 {
                for i in 0..10 {
                    let bump = |d: f64| {
                        let mut f = fs.clone();
                        let target = if which == 0 { &mut f.h1 } else { &mut f.h1_first };
                        let mut taps = target.taps().to_vec();
                        taps[i] += d;
                        *target = Filter::new(taps).unwrap();
                        total_loss(&data, &f, &obj).unwrap().total
                    };
                    let fd = (bump(eps) - bump(-eps)) / (2.0 * eps);
                    let got = if which == 0 { g.h1[i] } else { g.h1_first[i] };
                    let rel = (got - fd).abs() / fd.abs().max(1e-3);
                    assert!(rel < 1e-4, "{variant} filter {which} tap {i}: {got} vs {fd}");
                }
            }
        }
    }
}
