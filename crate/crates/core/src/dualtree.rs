//! Real and complex dual-tree transforms.
//!
//! Tree 1 runs `h1_first` at level one and `h1` afterwards; tree 2 uses the
//! time reverses. The 2D real transform pairs each tree with itself on rows
//! and columns and mixes the two detail groups with a √2-normalized
//! sum/difference butterfly. The complex transform runs all four row/column
//! pairings `(i, j)` and butterflies `(W11, W22)` and `(W12, W21)`; the
//! first pair gives real parts and the second imaginary parts.

use crate::dwt1d::{forward_levels, inverse_levels, Pyramid1D};
use crate::dwt2d::{forward_separable, inverse_separable, Bands, Pyramid2D};
use crate::error::{Error, Result};
use crate::filter::{DualTreeFilterSet, Tree};
use crate::io::BandFile;
use crate::signal::{check_dyadic, Image, Signal};
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

/// Real (two-tree) or complex (four-tree) 2D transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Real,
    Complex,
}

impl Variant {
    pub fn trees(self) -> usize {
        match self {
            Variant::Real => 2,
            Variant::Complex => 4,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Real => "real",
            Variant::Complex => "complex",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" => Ok(Variant::Real),
            "complex" => Ok(Variant::Complex),
            _ => Err(Error::Parse(format!("unknown variant `{s}` (expected real or complex)"))),
        }
    }
}

/// `((a + b)/√2, (a − b)/√2)`; its own inverse.
pub fn butterfly(a: &Image, b: &Image) -> (Image, Image) {
    (a.add(b).scale(FRAC_1_SQRT_2), a.sub(b).scale(FRAC_1_SQRT_2))
}

fn butterfly_bands(a: &Bands, b: &Bands) -> (Bands, Bands) {
    let (h1, h2) = butterfly(&a.h, &b.h);
    let (v1, v2) = butterfly(&a.v, &b.v);
    let (d1, d2) = butterfly(&a.d, &b.d);
    (Bands { h: h1, v: v1, d: d1 }, Bands { h: h2, v: v2, d: d2 })
}

pub(crate) fn check_band(band: usize) -> Result<()> {
    if (1..=6).contains(&band) {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("band {band} outside 1..=6")))
    }
}

// ---------------------------------------------------------------------------
// 1D

/// Two real trees; level-`j` complex detail is `tree1 + i·tree2`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualTreePyramid1D {
    pub trees: [Pyramid1D; 2],
}

impl DualTreePyramid1D {
    pub fn levels(&self) -> usize {
        self.trees[0].levels()
    }

    pub fn zeros(n: usize, levels: usize) -> Self {
        DualTreePyramid1D {
            trees: [Pyramid1D::zeros(n, levels), Pyramid1D::zeros(n, levels)],
        }
    }

    pub fn real(&self, level: usize) -> &[f64] {
        self.trees[0].detail(level)
    }

    pub fn imag(&self, level: usize) -> &[f64] {
        self.trees[1].detail(level)
    }

    /// `√(re² + im²)` of the level-`level` detail.
    pub fn magnitude(&self, level: usize) -> Vec<f64> {
        self.real(level)
            .iter()
            .zip(self.imag(level))
            .map(|(a, b)| a.hypot(*b))
            .collect()
    }

    pub fn to_band_file(&self) -> BandFile {
        let mut f = BandFile::new("pyr1d")
            .field("J", self.levels())
            .field("N", self.trees[0].signal_len())
            .field("trees", 2);
        for j in 1..=self.levels() {
            f.push(format!("re{j}"), self.real(j));
            f.push(format!("im{j}"), self.imag(j));
        }
        f.push("a1", &self.trees[0].approx);
        f.push("a2", &self.trees[1].approx);
        f
    }

    pub fn from_band_file(mut f: BandFile) -> Result<Self> {
        if f.kind != "pyr1d" || f.get_field("trees") != Some("2") {
            return Err(Error::Parse("expected a pyr1d file with trees=2".into()));
        }
        let levels = f.usize_field("J")?;
        let mut re = Vec::new();
        let mut im = Vec::new();
        for j in 1..=levels {
            re.push(f.take(&format!("re{j}"))?);
            im.push(f.take(&format!("im{j}"))?);
        }
        let p = DualTreePyramid1D {
            trees: [
                Pyramid1D { approx: f.take("a1")?, details: re },
                Pyramid1D { approx: f.take("a2")?, details: im },
            ],
        };
        p.validate()?;
        if p.trees[0].signal_len() != f.usize_field("N")? {
            return Err(Error::Structure("band lengths disagree with N".into()));
        }
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        self.trees[0].validate()?;
        self.trees[1].validate()?;
        if self.trees[0].signal_len() != self.trees[1].signal_len() || self.trees[0].levels() != self.trees[1].levels() {
            return Err(Error::Structure("trees disagree in shape".into()));
        }
        Ok(())
    }
}

pub fn dtcwt1d_forward(x: &Signal, fs: &DualTreeFilterSet, levels: usize) -> Result<DualTreePyramid1D> {
    Ok(DualTreePyramid1D {
        trees: [
            forward_levels(x, &fs.tree(Tree::One), levels)?,
            forward_levels(x, &fs.tree(Tree::Two), levels)?,
        ],
    })
}

/// Average of the two per-tree inverses.
pub fn dtcwt1d_inverse(p: &DualTreePyramid1D, fs: &DualTreeFilterSet) -> Result<Signal> {
    p.validate()?;
    let a = inverse_levels(&p.trees[0], &fs.tree(Tree::One))?;
    let b = inverse_levels(&p.trees[1], &fs.tree(Tree::Two))?;
    Signal::new(a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect())
}

// ---------------------------------------------------------------------------
// 2D real

/// Six real bands per level (`groups[0]` = bands 1–3, `groups[1]` = 4–6)
/// and one approximation per tree.
#[derive(Debug, Clone, PartialEq)]
pub struct DualTreePyramidReal2D {
    pub details: Vec<[Bands; 2]>,
    pub approx: [Image; 2],
}

impl DualTreePyramidReal2D {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    pub fn image_shape(&self) -> (usize, usize) {
        let j = self.levels();
        (self.approx[0].rows() << j, self.approx[0].cols() << j)
    }

    pub fn zeros(rows: usize, cols: usize, levels: usize) -> Self {
        let z = Pyramid2D::zeros(rows, cols, levels);
        DualTreePyramidReal2D {
            details: z.details.iter().map(|b| [b.clone(), b.clone()]).collect(),
            approx: [z.approx.clone(), z.approx],
        }
    }

    /// Band `band` (1..=6) of `level` (1-based).
    pub fn band(&self, level: usize, band: usize) -> &Image {
        self.details[level - 1][(band - 1) / 3].get((band - 1) % 3)
    }

    pub fn band_mut(&mut self, level: usize, band: usize) -> &mut Image {
        self.details[level - 1][(band - 1) / 3].get_mut((band - 1) % 3)
    }

    /// Every detail coefficient.
    pub fn detail_coefficients(&self) -> impl Iterator<Item = f64> + '_ {
        self.details
            .iter()
            .flat_map(|g| g.iter().flat_map(|b| b.iter().flat_map(|i| i.data().iter())))
            .copied()
    }

    fn tree_pyramids(&self) -> [Pyramid2D; 2] {
        let mut t1 = Vec::new();
        let mut t2 = Vec::new();
        for [w1, w2] in &self.details {
            let (a, b) = butterfly_bands(w1, w2);
            t1.push(a);
            t2.push(b);
        }
        [
            Pyramid2D { approx: self.approx[0].clone(), details: t1 },
            Pyramid2D { approx: self.approx[1].clone(), details: t2 },
        ]
    }

    pub fn to_band_file(&self) -> BandFile {
        let (r, c) = self.image_shape();
        let mut f = BandFile::new("pyr2d")
            .field("J", self.levels())
            .field("rows", r)
            .field("cols", c)
            .field("trees", 2);
        for j in 1..=self.levels() {
            for b in 1..=6 {
                f.push(format!("j{j}b{b}"), self.band(j, b).data());
            }
        }
        f.push("a1", self.approx[0].data());
        f.push("a2", self.approx[1].data());
        f
    }

    pub fn from_band_file(mut f: BandFile) -> Result<Self> {
        let (levels, rows, cols) = dual_header(&f, 2)?;
        let mut p = DualTreePyramidReal2D::zeros(rows, cols, levels);
        for j in 1..=levels {
            for b in 1..=6 {
                let (r, c) = (rows >> j, cols >> j);
                *p.band_mut(j, b) = Image::new(r, c, f.take(&format!("j{j}b{b}"))?)?;
            }
        }
        let (r, c) = (rows >> levels, cols >> levels);
        p.approx = [Image::new(r, c, f.take("a1")?)?, Image::new(r, c, f.take("a2")?)?];
        Ok(p)
    }
}

fn dual_header(f: &BandFile, trees: usize) -> Result<(usize, usize, usize)> {
    if f.kind != "pyr2d" || f.get_field("trees") != Some(&trees.to_string()) {
        return Err(Error::Parse(format!("expected a pyr2d file with trees={trees}")));
    }
    let (levels, rows, cols) = (f.usize_field("J")?, f.usize_field("rows")?, f.usize_field("cols")?);
    check_dyadic(rows, levels, "rows")?;
    check_dyadic(cols, levels, "cols")?;
    Ok((levels, rows, cols))
}

pub fn dtcwt2d_real_forward(x: &Image, fs: &DualTreeFilterSet, levels: usize) -> Result<DualTreePyramidReal2D> {
    let t1 = fs.tree(Tree::One);
    let t2 = fs.tree(Tree::Two);
    let p1 = forward_separable(x, &t1, &t1, levels)?;
    let p2 = forward_separable(x, &t2, &t2, levels)?;
    Ok(DualTreePyramidReal2D {
        details: p1
            .details
            .iter()
            .zip(&p2.details)
            .map(|(a, b)| {
                let (w1, w2) = butterfly_bands(a, b);
                [w1, w2]
            })
            .collect(),
        approx: [p1.approx, p2.approx],
    })
}

pub fn dtcwt2d_real_inverse(p: &DualTreePyramidReal2D, fs: &DualTreeFilterSet) -> Result<Image> {
    check_real_shapes(p)?;
    let [p1, p2] = p.tree_pyramids();
    let t1 = fs.tree(Tree::One);
    let t2 = fs.tree(Tree::Two);
    let a = inverse_separable(&p1, &t1, &t1)?;
    let b = inverse_separable(&p2, &t2, &t2)?;
    Ok(a.add(&b).scale(0.5))
}

fn check_real_shapes(p: &DualTreePyramidReal2D) -> Result<()> {
    if p.approx[0].shape() != p.approx[1].shape() {
        return Err(Error::Structure("tree approximations differ in shape".into()));
    }
    for g in &p.details {
        if g[0].shape() != g[1].shape() {
            return Err(Error::Structure("band groups differ in shape".into()));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// 2D complex

/// One complex detail band.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexBand {
    pub re: Image,
    pub im: Image,
}

impl ComplexBand {
    pub fn magnitude(&self) -> Image {
        Image::new(
            self.re.rows(),
            self.re.cols(),
            self.re.data().iter().zip(self.im.data()).map(|(a, b)| a.hypot(*b)).collect(),
        )
        .expect("band shape")
    }

    pub fn magnitude_squared(&self) -> Image {
        Image::new(
            self.re.rows(),
            self.re.cols(),
            self.re.data().iter().zip(self.im.data()).map(|(a, b)| a * a + b * b).collect(),
        )
        .expect("band shape")
    }
}

/// Tree order used for [`DualTreePyramidComplex2D::approx`]: `(row, column)`.
pub const COMPLEX_TREES: [(Tree, Tree); 4] = [
    (Tree::One, Tree::One),
    (Tree::One, Tree::Two),
    (Tree::Two, Tree::One),
    (Tree::Two, Tree::Two),
];

/// Six complex bands per level and one approximation per tree in
/// [`COMPLEX_TREES`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct DualTreePyramidComplex2D {
    pub details: Vec<[ComplexBand; 6]>,
    pub approx: [Image; 4],
}

impl DualTreePyramidComplex2D {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    pub fn image_shape(&self) -> (usize, usize) {
        let j = self.levels();
        (self.approx[0].rows() << j, self.approx[0].cols() << j)
    }

    pub fn zeros(rows: usize, cols: usize, levels: usize) -> Self {
        let z = |r: usize, c: usize| Image::zeros(r, c);
        DualTreePyramidComplex2D {
            details: (1..=levels)
                .map(|j| {
                    std::array::from_fn(|_| ComplexBand {
                        re: z(rows >> j, cols >> j),
                        im: z(rows >> j, cols >> j),
                    })
                })
                .collect(),
            approx: std::array::from_fn(|_| z(rows >> levels, cols >> levels)),
        }
    }

    /// Band `band` (1..=6) of `level` (1-based).
    pub fn band(&self, level: usize, band: usize) -> &ComplexBand {
        &self.details[level - 1][band - 1]
    }

    pub fn band_mut(&mut self, level: usize, band: usize) -> &mut ComplexBand {
        &mut self.details[level - 1][band - 1]
    }

    pub fn detail_coefficients(&self) -> impl Iterator<Item = f64> + '_ {
        self.details
            .iter()
            .flat_map(|l| l.iter().flat_map(|b| b.re.data().iter().chain(b.im.data())))
            .copied()
    }

    /// Post-butterfly groups of a level as `[W11', W22', W12', W21']`.
    fn groups(level: &[ComplexBand; 6]) -> [Bands; 4] {
        let pick = |lo: usize, im: bool| {
            let g = |i: usize| {
                let b = &level[lo + i];
                if im { b.im.clone() } else { b.re.clone() }
            };
            Bands { h: g(0), v: g(1), d: g(2) }
        };
        [pick(0, false), pick(3, false), pick(0, true), pick(3, true)]
    }

    fn from_groups(w11: Bands, w22: Bands, w12: Bands, w21: Bands) -> [ComplexBand; 6] {
        let mk = |re: &Bands, im: &Bands, i: usize| ComplexBand {
            re: re.get(i).clone(),
            im: im.get(i).clone(),
        };
        [
            mk(&w11, &w12, 0),
            mk(&w11, &w12, 1),
            mk(&w11, &w12, 2),
            mk(&w22, &w21, 0),
            mk(&w22, &w21, 1),
            mk(&w22, &w21, 2),
        ]
    }

    pub fn to_band_file(&self) -> BandFile {
        let (r, c) = self.image_shape();
        let mut f = BandFile::new("pyr2d")
            .field("J", self.levels())
            .field("rows", r)
            .field("cols", c)
            .field("trees", 4);
        for j in 1..=self.levels() {
            for b in 1..=6 {
                f.push(format!("j{j}b{b}re"), self.band(j, b).re.data());
                f.push(format!("j{j}b{b}im"), self.band(j, b).im.data());
            }
        }
        for (i, a) in ["a11", "a12", "a21", "a22"].iter().zip(&self.approx) {
            f.push(*i, a.data());
        }
        f
    }

    pub fn from_band_file(mut f: BandFile) -> Result<Self> {
        let (levels, rows, cols) = dual_header(&f, 4)?;
        let mut p = DualTreePyramidComplex2D::zeros(rows, cols, levels);
        for j in 1..=levels {
            let (r, c) = (rows >> j, cols >> j);
            for b in 1..=6 {
                let band = p.band_mut(j, b);
                band.re = Image::new(r, c, f.take(&format!("j{j}b{b}re"))?)?;
                band.im = Image::new(r, c, f.take(&format!("j{j}b{b}im"))?)?;
            }
        }
        let (r, c) = (rows >> levels, cols >> levels);
        for (i, a) in ["a11", "a12", "a21", "a22"].iter().enumerate() {
            p.approx[i] = Image::new(r, c, f.take(a)?)?;
        }
        Ok(p)
    }
}

pub fn dtcwt2d_complex_forward(x: &Image, fs: &DualTreeFilterSet, levels: usize) -> Result<DualTreePyramidComplex2D> {
    let [p11, p12, p21, p22] = complex_trees(x, fs, levels)?;
    let details = (0..levels)
        .map(|l| {
            let (w11, w22) = butterfly_bands(&p11.details[l], &p22.details[l]);
            let (w12, w21) = butterfly_bands(&p12.details[l], &p21.details[l]);
            DualTreePyramidComplex2D::from_groups(w11, w22, w12, w21)
        })
        .collect();
    Ok(DualTreePyramidComplex2D {
        details,
        approx: [p11.approx, p12.approx, p21.approx, p22.approx],
    })
}

/// The four pre-butterfly separable transforms in [`COMPLEX_TREES`] order.
pub fn complex_trees(x: &Image, fs: &DualTreeFilterSet, levels: usize) -> Result<[Pyramid2D; 4]> {
    let out = COMPLEX_TREES
        .iter()
        .map(|&(r, c)| forward_separable(x, &fs.tree(r), &fs.tree(c), levels))
        .collect::<Result<Vec<_>>>()?;
    Ok(out.try_into().expect("four trees"))
}

pub fn dtcwt2d_complex_inverse(p: &DualTreePyramidComplex2D, fs: &DualTreeFilterSet) -> Result<Image> {
    for a in &p.approx[1..] {
        if a.shape() != p.approx[0].shape() {
            return Err(Error::Structure("tree approximations differ in shape".into()));
        }
    }
    let mut trees: [Vec<Bands>; 4] = Default::default();
    for level in &p.details {
        let [w11, w22, w12, w21] = DualTreePyramidComplex2D::groups(level);
        let (a11, a22) = butterfly_bands(&w11, &w22);
        let (a12, a21) = butterfly_bands(&w12, &w21);
        for (t, b) in trees.iter_mut().zip([a11, a12, a21, a22]) {
            t.push(b);
        }
    }
    let mut sum: Option<Image> = None;
    for ((details, approx), &(r, c)) in trees.into_iter().zip(&p.approx).zip(&COMPLEX_TREES) {
        let py = Pyramid2D { approx: approx.clone(), details };
        let x = inverse_separable(&py, &fs.tree(r), &fs.tree(c))?;
        sum = Some(match sum {
            Some(s) => s.add(&x),
            None => x,
        });
    }
    Ok(sum.expect("four trees").scale(0.25))
}
