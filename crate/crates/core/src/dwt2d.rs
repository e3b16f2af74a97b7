//! Separable 2D wavelet transform and coefficient tiling.
//!
//! Each level filters columns first, then rows. With `LC`/`HC` the column
//! lowpass/highpass and `LR`/`HR` the row ones, the bands are
//! `h = LR(HC(x))`, `v = HR(LC(x))`, `d = HR(HC(x))` and the next
//! approximation is `LR(LC(x))`.

use crate::error::{Error, Result};
use crate::filter::{Filter, LevelFilters};
use crate::io::BandFile;
use crate::multirate::{analyze, synthesize_add, Axis};
use crate::signal::{check_dyadic, Image};

/// Horizontal, vertical and diagonal detail of one level.
#[derive(Debug, Clone, PartialEq)]
pub struct Bands {
    pub h: Image,
    pub v: Image,
    pub d: Image,
}

impl Bands {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Bands {
            h: Image::zeros(rows, cols),
            v: Image::zeros(rows, cols),
            d: Image::zeros(rows, cols),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.h.shape()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Image> {
        [&self.h, &self.v, &self.d].into_iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut Image> {
        [&mut self.h, &mut self.v, &mut self.d].into_iter()
    }

    /// Band by orientation index 0 (h), 1 (v) or 2 (d).
    pub fn get(&self, i: usize) -> &Image {
        match i {
            0 => &self.h,
            1 => &self.v,
            _ => &self.d,
        }
    }

    pub fn get_mut(&mut self, i: usize) -> &mut Image {
        match i {
            0 => &mut self.h,
            1 => &mut self.v,
            _ => &mut self.d,
        }
    }

    fn check(&self, rows: usize, cols: usize, level: usize) -> Result<()> {
        for b in self.iter() {
            if b.shape() != (rows, cols) {
                return Err(Error::Structure(format!(
                    "level {level} band is {}x{}, expected {rows}x{cols}",
                    b.rows(),
                    b.cols()
                )));
            }
        }
        Ok(())
    }
}

/// Approximation plus per-level detail bands (index 0 is level 1).
#[derive(Debug, Clone, PartialEq)]
pub struct Pyramid2D {
    pub approx: Image,
    pub details: Vec<Bands>,
}

impl Pyramid2D {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    pub fn image_shape(&self) -> (usize, usize) {
        let j = self.levels();
        (self.approx.rows() << j, self.approx.cols() << j)
    }

    pub fn level(&self, level: usize) -> &Bands {
        &self.details[level - 1]
    }

    pub fn zeros(rows: usize, cols: usize, levels: usize) -> Self {
        Pyramid2D {
            approx: Image::zeros(rows >> levels, cols >> levels),
            details: (1..=levels).map(|j| Bands::zeros(rows >> j, cols >> j)).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.details.is_empty() {
            return Err(Error::Structure("pyramid has no levels".into()));
        }
        let (r, c) = self.image_shape();
        for (i, b) in self.details.iter().enumerate() {
            b.check(r >> (i + 1), c >> (i + 1), i + 1)?;
        }
        Ok(())
    }

    pub fn coefficients(&self) -> impl Iterator<Item = f64> + '_ {
        self.details
            .iter()
            .flat_map(|b| b.iter().flat_map(|i| i.data().iter()))
            .chain(self.approx.data())
            .copied()
    }

    pub fn to_band_file(&self) -> BandFile {
        let (r, c) = self.image_shape();
        let mut f = BandFile::new("pyr2d")
            .field("J", self.levels())
            .field("rows", r)
            .field("cols", c);
        push_bands(&mut f, "", &self.details);
        f.push("a", self.approx.data());
        f
    }

    pub fn from_band_file(mut f: BandFile) -> Result<Self> {
        if f.kind != "pyr2d" || f.get_field("trees").is_some() {
            return Err(Error::Parse(format!("expected a pyr2d file, found `{}`", f.kind)));
        }
        let (levels, rows, cols) = (f.usize_field("J")?, f.usize_field("rows")?, f.usize_field("cols")?);
        check_dyadic(rows, levels, "rows")?;
        check_dyadic(cols, levels, "cols")?;
        let details = take_bands(&mut f, "", rows, cols, levels)?;
        let approx = Image::new(rows >> levels, cols >> levels, f.take("a")?)?;
        Ok(Pyramid2D { approx, details })
    }
}

pub(crate) fn push_bands(f: &mut BandFile, prefix: &str, details: &[Bands]) {
    for (i, b) in details.iter().enumerate() {
        for (name, img) in ["h", "v", "d"].iter().zip(b.iter()) {
            f.push(format!("{prefix}{name}{}", i + 1), img.data());
        }
    }
}

pub(crate) fn take_bands(
    f: &mut BandFile,
    prefix: &str,
    rows: usize,
    cols: usize,
    levels: usize,
) -> Result<Vec<Bands>> {
    (1..=levels)
        .map(|j| {
            let (r, c) = (rows >> j, cols >> j);
            let mut band = |name: &str| Image::new(r, c, f.take(&format!("{prefix}{name}{j}"))?);
            Ok(Bands {
                h: band("h")?,
                v: band("v")?,
                d: band("d")?,
            })
        })
        .collect()
}

/// One analysis level: returns `(approx, bands)`.
pub(crate) fn analyze_level(x: &Image, row: &Filter, col: &Filter) -> (Image, Bands) {
    let (r, c) = x.shape();
    let (gr, gc) = (row.wavelet(), col.wavelet());
    let lc = analyze(x.data(), r, c, col.taps(), Axis::Cols);
    let hc = analyze(x.data(), r, c, gc.taps(), Axis::Cols);
    let (hr_, hc_) = (r / 2, c / 2);
    let img = |v| Image::new(hr_, hc_, v).expect("band shape");
    let a = img(analyze(&lc, hr_, c, row.taps(), Axis::Rows));
    let bands = Bands {
        h: img(analyze(&hc, hr_, c, row.taps(), Axis::Rows)),
        v: img(analyze(&lc, hr_, c, gr.taps(), Axis::Rows)),
        d: img(analyze(&hc, hr_, c, gr.taps(), Axis::Rows)),
    };
    (a, bands)
}

/// One synthesis level, the adjoint of [`analyze_level`].
pub(crate) fn synthesize_level(a: &Image, bands: &Bands, row: &Filter, col: &Filter) -> Image {
    let (r, c) = a.shape();
    let (gr, gc) = (row.wavelet(), col.wavelet());
    let mut lc = vec![0.0; r * c * 2];
    synthesize_add(a.data(), r, c, row.taps(), Axis::Rows, &mut lc);
    synthesize_add(bands.v.data(), r, c, gr.taps(), Axis::Rows, &mut lc);
    let mut hc = vec![0.0; r * c * 2];
    synthesize_add(bands.h.data(), r, c, row.taps(), Axis::Rows, &mut hc);
    synthesize_add(bands.d.data(), r, c, gr.taps(), Axis::Rows, &mut hc);
    let mut out = vec![0.0; r * c * 4];
    synthesize_add(&lc, r, 2 * c, col.taps(), Axis::Cols, &mut out);
    synthesize_add(&hc, r, 2 * c, gc.taps(), Axis::Cols, &mut out);
    Image::new(2 * r, 2 * c, out).expect("image shape")
}

/// Forward transform with separate row and column filters per level.
pub fn forward_separable(x: &Image, row: &LevelFilters, col: &LevelFilters, levels: usize) -> Result<Pyramid2D> {
    check_dyadic(x.rows(), levels, "image height")?;
    check_dyadic(x.cols(), levels, "image width")?;
    let mut a = x.clone();
    let mut details = Vec::with_capacity(levels);
    for level in 1..=levels {
        let (next, bands) = analyze_level(&a, row.at(level), col.at(level));
        details.push(bands);
        a = next;
    }
    Ok(Pyramid2D { approx: a, details })
}

/// Inverse of [`forward_separable`].
pub fn inverse_separable(p: &Pyramid2D, row: &LevelFilters, col: &LevelFilters) -> Result<Image> {
    p.validate()?;
    let mut a = p.approx.clone();
    for level in (1..=p.levels()).rev() {
        a = synthesize_level(&a, p.level(level), row.at(level), col.at(level));
    }
    Ok(a)
}

pub fn dwt2d_forward(x: &Image, h: &Filter, levels: usize) -> Result<Pyramid2D> {
    let f = LevelFilters::uniform(h.clone());
    forward_separable(x, &f, &f, levels)
}

pub fn dwt2d_inverse(p: &Pyramid2D, h: &Filter) -> Result<Image> {
    let f = LevelFilters::uniform(h.clone());
    inverse_separable(p, &f, &f)
}

/// Inverse of `p` with everything except the level-`level` details zeroed.
pub fn reconstruct_single_level(p: &Pyramid2D, h: &Filter, level: usize) -> Result<Image> {
    if level == 0 || level > p.levels() {
        return Err(Error::OutOfRange(format!(
            "level {level} outside 1..={}",
            p.levels()
        )));
    }
    let (r, c) = p.image_shape();
    let mut q = Pyramid2D::zeros(r, c, p.levels());
    q.details[level - 1] = p.level(level).clone();
    dwt2d_inverse(&q, h)
}

/// Inverse of `p` with every detail band zeroed.
pub fn reconstruct_approx(p: &Pyramid2D, h: &Filter) -> Result<Image> {
    let (r, c) = p.image_shape();
    let mut q = Pyramid2D::zeros(r, c, p.levels());
    q.approx = p.approx.clone();
    dwt2d_inverse(&q, h)
}

fn blit(dst: &mut Image, src: &Image, r0: usize, c0: usize) {
    for i in 0..src.rows() {
        for j in 0..src.cols() {
            dst.set(r0 + i, c0 + j, src.get(i, j));
        }
    }
}

fn cut(src: &Image, r0: usize, c0: usize, rows: usize, cols: usize) -> Image {
    Image::from_fn(rows, cols, |i, j| src.get(r0 + i, c0 + j))
}

/// Lays the pyramid out as one image: approximation top-left, level `j`
/// details in the L-shape around it (`h` right, `v` below, `d` diagonal).
pub fn tile_coefficients(p: &Pyramid2D) -> Image {
    let (r, c) = p.image_shape();
    let mut out = Image::zeros(r, c);
    for (i, b) in p.details.iter().enumerate() {
        let (br, bc) = (r >> (i + 1), c >> (i + 1));
        blit(&mut out, &b.h, 0, bc);
        blit(&mut out, &b.v, br, 0);
        blit(&mut out, &b.d, br, bc);
    }
    blit(&mut out, &p.approx, 0, 0);
    out
}

/// Inverse of [`tile_coefficients`].
pub fn untile(img: &Image, levels: usize) -> Result<Pyramid2D> {
    let (r, c) = img.shape();
    check_dyadic(r, levels, "tile height")?;
    check_dyadic(c, levels, "tile width")?;
    let details = (1..=levels)
        .map(|j| {
            let (br, bc) = (r >> j, c >> j);
            Bands {
                h: cut(img, 0, bc, br, bc),
                v: cut(img, br, 0, br, bc),
                d: cut(img, br, bc, br, bc),
            }
        })
        .collect();
    Ok(Pyramid2D {
        approx: cut(img, 0, 0, r >> levels, c >> levels),
        details,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dwt1d::dwt1d_forward;
    use crate::signal::{relative_error, Signal};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> Image {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Image::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
    }

    fn h1() -> Filter {
        crate::fixtures::builtin("learned_complex_h").unwrap()
    }

    fn close(a: &Image, b: &Image, tol: f64) {
        assert_eq!(a.shape(), b.shape());
        for (x, y) in a.data().iter().zip(b.data()) {
            assert_abs_diff_eq!(*x, *y, epsilon = tol);
        }
    }

    #[test]
    fn constant_image_has_no_detail() {
        let x = Image::from_fn(16, 16, |_, _| 3.0);
        let p = dwt2d_forward(&x, &Filter::haar(), 3).unwrap();
        assert!(p.details.iter().all(|b| b.iter().all(|i| i.data().iter().all(|v| v.abs() < 1e-12))));
    }

    #[test]
    fn separable_input_gives_outer_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u: Vec<f64> = (0..32).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let h = h1();
        let p = dwt2d_forward(&Image::outer(&u, &v), &h, 2).unwrap();
        let pu = dwt1d_forward(&Signal::new(u.clone()).unwrap(), &h, 2).unwrap();
        let pv = dwt1d_forward(&Signal::new(v.clone()).unwrap(), &h, 2).unwrap();
        // approximation chains along the other axis up to level j
        let approx_at = |x: &[f64], j: usize| -> Vec<f64> {
            if j == 0 {
                return x.to_vec();
            }
            dwt1d_forward(&Signal::new(x.to_vec()).unwrap(), &h, j).unwrap().approx
        };
        for j in 1..=2 {
            let au = approx_at(&u, j);
            let av = approx_at(&v, j);
            close(&p.level(j).h, &Image::outer(pu.detail(j), &av), 1e-12);
            close(&p.level(j).v, &Image::outer(&au, pv.detail(j)), 1e-12);
            close(&p.level(j).d, &Image::outer(pu.detail(j), pv.detail(j)), 1e-12);
        }
        close(&p.approx, &Image::outer(&pu.approx, &pv.approx), 1e-12);
    }

    #[test]
    fn vertical_edge_haar() {
        let x = Image::from_fn(8, 8, |_, j| if j >= 3 { 1.0 } else { 0.0 });
        let p = dwt2d_forward(&x, &Filter::haar(), 1).unwrap();
        let b = p.level(1);
        assert!(b.d.data().iter().all(|&v| v == 0.0));
        assert!(b.h.data().iter().all(|&v| v == 0.0));
        for i in 0..4 {
            for j in 0..4 {
                let v = b.v.get(i, j);
                if j == 1 {
                    assert_abs_diff_eq!(v.abs(), 1.0, epsilon = 1e-14);
                } else {
                    assert_eq!(v, 0.0);
                }
            }
        }
    }

    #[test]
    fn round_trips() {
        let x = random(64, 64, 1);
        let haar = Filter::haar();
        let back = dwt2d_inverse(&dwt2d_forward(&x, &haar, 3).unwrap(), &haar).unwrap();
        assert!(relative_error(back.data(), x.data()) < 1e-10);
        assert!(dwt2d_inverse(&Pyramid2D::zeros(16, 8, 2), &h1())
            .unwrap()
            .data()
            .iter()
            .all(|&v| v == 0.0));
        let back = dwt2d_inverse(&dwt2d_forward(&x, &h1(), 3).unwrap(), &h1()).unwrap();
        assert!(relative_error(back.data(), x.data()) < 8e-2);
        let k = crate::fixtures::builtin("kingsbury_qshift_b").unwrap();
        let back = dwt2d_inverse(&dwt2d_forward(&x, &k, 3).unwrap(), &k).unwrap();
        assert!(relative_error(back.data(), x.data()) < 1e-10);
    }

    #[test]
    fn structural_errors() {
        assert!(matches!(dwt2d_forward(&random(12, 16, 0), &Filter::haar(), 3), Err(Error::InvalidLength(_))));
        let mut p = dwt2d_forward(&random(16, 16, 0), &Filter::haar(), 2).unwrap();
        p.details[1].d = Image::zeros(3, 4);
        assert!(matches!(dwt2d_inverse(&p, &Filter::haar()), Err(Error::Structure(_))));
        assert!(reconstruct_single_level(&dwt2d_forward(&random(16, 16, 0), &Filter::haar(), 2).unwrap(), &Filter::haar(), 3).is_err());
    }

    #[test]
    fn single_levels_sum_to_image() {
        let x = random(32, 32, 5);
        let h = h1();
        let p = dwt2d_forward(&x, &h, 3).unwrap();
        let mut sum = reconstruct_approx(&p, &h).unwrap();
        for j in 1..=3 {
            sum = sum.add(&reconstruct_single_level(&p, &h, j).unwrap());
        }
        close(&sum, &dwt2d_inverse(&p, &h).unwrap(), 1e-9);
        let haar = Filter::haar();
        let flat = dwt2d_forward(&Image::from_fn(16, 16, |_, _| 1.0), &haar, 2).unwrap();
        for j in 1..=2 {
            assert!(reconstruct_single_level(&flat, &haar, j).unwrap().data().iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn two_by_two_tile() {
        let x = Image::new(2, 2, vec![1.0, 2.0, 3.0, 5.0]).unwrap();
        let p = dwt2d_forward(&x, &Filter::haar(), 1).unwrap();
        let t = tile_coefficients(&p);
        assert_eq!(t.get(0, 0), p.approx.get(0, 0));
        assert_eq!(t.get(0, 1), p.level(1).h.get(0, 0));
        assert_eq!(t.get(1, 0), p.level(1).v.get(0, 0));
        assert_eq!(t.get(1, 1), p.level(1).d.get(0, 0));
    }

    #[test]
    fn tile_preserves_multiset() {
        let p = dwt2d_forward(&random(8, 8, 2), &Filter::haar(), 2).unwrap();
        let mut a: Vec<f64> = p.coefficients().collect();
        let mut b = tile_coefficients(&p).into_data();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        assert_eq!(a, b);
    }

    #[test]
    fn band_file_round_trip() {
        let p = dwt2d_forward(&random(16, 8, 3), &Filter::haar(), 2).unwrap();
        let text = p.to_band_file().to_string();
        assert!(text.starts_with("# pyr2d J=2 rows=16 cols=8\n"));
        assert_eq!(Pyramid2D::from_band_file(text.parse().unwrap()).unwrap(), p);
    }

    proptest! {
        #[test]
        fn untile_inverts_tile(seed in any::<u64>(), levels in 1usize..=3) {
            let p = dwt2d_forward(&random(16, 32, seed), &Filter::haar(), levels).unwrap();
            prop_assert_eq!(untile(&tile_coefficients(&p), levels).unwrap(), p);
        }

        #[test]
        fn haar_conserves_energy(seed in any::<u64>()) {
            let x = random(32, 32, seed);
            let p = dwt2d_forward(&x, &Filter::haar(), 3).unwrap();
            let ep: f64 = p.coefficients().map(|v| v * v).sum();
            prop_assert!((ep - x.energy()).abs() <= 1e-9 * x.energy());
        }

        #[test]
        fn transpose_swaps_h_and_v(seed in any::<u64>()) {
            let x = random(16, 32, seed);
            let h = h1();
            let p = dwt2d_forward(&x, &h, 2).unwrap();
            let q = dwt2d_forward(&x.transpose(), &h, 2).unwrap();
            for j in 1..=2 {
                for (a, b) in [(&q.level(j).h, &p.level(j).v), (&q.level(j).v, &p.level(j).h), (&q.level(j).d, &p.level(j).d)] {
                    let bt = b.transpose();
                    for (x, y) in a.data().iter().zip(bt.data()) {
                        prop_assert!((x - y).abs() <= 1e-12);
                    }
                }
            }
        }

        #[test]
        fn rows_then_columns_of_1d(seed in any::<u64>()) {
            // one level equals the 1D step applied down every column then along every row
            let x = random(8, 8, seed);
            let h = h1();
            let g = h.wavelet();
            let p = dwt2d_forward(&x, &h, 1).unwrap();
            let col = |img: &Image, f: &Filter| {
                let t = img.transpose();
                let rows: Vec<Vec<f64>> = (0..t.rows()).map(|i| crate::multirate::oracle::decimate(t.row(i), f.taps())).collect();
                Image::new(t.rows(), t.cols() / 2, rows.concat()).unwrap().transpose()
            };
            let row = |img: &Image, f: &Filter| {
                let rows: Vec<Vec<f64>> = (0..img.rows()).map(|i| crate::multirate::oracle::decimate(img.row(i), f.taps())).collect();
                Image::new(img.rows(), img.cols() / 2, rows.concat()).unwrap()
            };
            let (lc, hc) = (col(&x, &h), col(&x, &g));
            for (a, b) in [(&p.approx, row(&lc, &h)), (&p.level(1).h, row(&hc, &h)), (&p.level(1).v, row(&lc, &g)), (&p.level(1).d, row(&hc, &g))] {
                for (x, y) in a.data().iter().zip(b.data()) {
                    prop_assert!((x - y).abs() <= 1e-12);
                }
            }
        }
    }
}
