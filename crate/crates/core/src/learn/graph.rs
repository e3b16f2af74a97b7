//! Dual-tree transforms recorded on a [`Tape`].

use super::tape::{Tape, Var};
use crate::dualtree::Variant;
use crate::filter::{DualTreeFilterSet, Tree};
use crate::multirate::Axis;
use std::f64::consts::FRAC_1_SQRT_2;

/// Scaling and wavelet filter nodes for one tree at one level.
#[derive(Debug, Clone, Copy)]
pub struct PairVars {
    pub h: Var,
    pub g: Var,
}

#[derive(Debug, Clone, Copy)]
pub struct TreeVars {
    pub first: PairVars,
    pub rest: PairVars,
}

impl TreeVars {
    pub fn at(&self, level: usize) -> PairVars {
        if level <= 1 {
            self.first
        } else {
            self.rest
        }
    }
}

/// The two learnable filters as tape leaves plus every derived filter.
#[derive(Debug, Clone, Copy)]
pub struct FilterVars {
    pub h1: Var,
    pub h1_first: Var,
    pub trees: [TreeVars; 2],
}

impl FilterVars {
    pub fn new(tape: &mut Tape, fs: &DualTreeFilterSet) -> Self {
        let h1 = tape.leaf(fs.h1.taps().to_vec());
        let h1_first = tape.leaf(fs.h1_first.taps().to_vec());
        let pair = |tape: &mut Tape, h: Var| PairVars { h, g: tape.mirror(h) };
        let t1 = TreeVars {
            first: pair(tape, h1_first),
            rest: pair(tape, h1),
        };
        let h2_first = tape.reverse(h1_first);
        let h2 = tape.reverse(h1);
        let t2 = TreeVars {
            first: pair(tape, h2_first),
            rest: pair(tape, h2),
        };
        FilterVars { h1, h1_first, trees: [t1, t2] }
    }

    pub fn tree(&self, t: Tree) -> &TreeVars {
        &self.trees[t.index()]
    }
}

/// `(row tree, column tree)` of every separable tree, in the order used by
/// [`DualTape::approx`].
pub fn tree_pairs(variant: Variant) -> &'static [(Tree, Tree)] {
    match variant {
        Variant::Real => &[(Tree::One, Tree::One), (Tree::Two, Tree::Two)],
        Variant::Complex => &crate::dualtree::COMPLEX_TREES,
    }
}

/// Pairs of trees combined by a butterfly. Each pair yields two groups.
fn butterfly_pairs(variant: Variant) -> &'static [(usize, usize)] {
    match variant {
        Variant::Real => &[(0, 1)],
        // (W11, W22) then (W12, W21)
        Variant::Complex => &[(0, 3), (1, 2)],
    }
}

/// A dual-tree pyramid on the tape. `groups[level-1]` holds the
/// post-butterfly groups: `[W1', W2']` (real) or `[W11', W22', W12', W21']`
/// (complex), each as `[h, v, d]`.
#[derive(Debug, Clone)]
pub struct DualTape {
    pub rows: usize,
    pub cols: usize,
    pub groups: Vec<Vec<[Var; 3]>>,
    pub approx: Vec<Var>,
}

impl DualTape {
    pub fn levels(&self) -> usize {
        self.groups.len()
    }

    /// `(group, orientation)` holding the real (or only) part of `band`.
    pub fn real_slot(band: usize) -> (usize, usize) {
        ((band - 1) / 3, (band - 1) % 3)
    }

    /// `(group, orientation)` holding the imaginary part of complex `band`.
    pub fn imag_slot(band: usize) -> (usize, usize) {
        (2 + (band - 1) / 3, (band - 1) % 3)
    }

    /// Every detail node, for the sparsity penalty.
    pub fn details(&self) -> impl Iterator<Item = Var> + '_ {
        self.groups.iter().flatten().flatten().copied()
    }

    /// An all-zero pyramid for an image of the given shape.
    pub fn zeros(tape: &mut Tape, variant: Variant, rows: usize, cols: usize, levels: usize) -> Self {
        let groups = (1..=levels)
            .map(|j| {
                let n = (rows >> j) * (cols >> j);
                (0..variant.trees())
                    .map(|_| [tape.zeros(n), tape.zeros(n), tape.zeros(n)])
                    .collect()
            })
            .collect();
        let n = (rows >> levels) * (cols >> levels);
        let approx = (0..variant.trees()).map(|_| tape.zeros(n)).collect();
        DualTape { rows, cols, groups, approx }
    }
}

fn analyze_level(tape: &mut Tape, x: Var, r: usize, c: usize, row: PairVars, col: PairVars) -> (Var, [Var; 3]) {
    let lc = tape.analyze(x, col.h, r, c, Axis::Cols);
    let hc = tape.analyze(x, col.g, r, c, Axis::Cols);
    let a = tape.analyze(lc, row.h, r / 2, c, Axis::Rows);
    let h = tape.analyze(hc, row.h, r / 2, c, Axis::Rows);
    let v = tape.analyze(lc, row.g, r / 2, c, Axis::Rows);
    let d = tape.analyze(hc, row.g, r / 2, c, Axis::Rows);
    (a, [h, v, d])
}

fn synthesize_level(tape: &mut Tape, a: Var, [h, v, d]: [Var; 3], r: usize, c: usize, row: PairVars, col: PairVars) -> Var {
    let s1 = tape.synthesize(a, row.h, r, c, Axis::Rows);
    let s2 = tape.synthesize(v, row.g, r, c, Axis::Rows);
    let lc = tape.add(s1, s2);
    let s3 = tape.synthesize(h, row.h, r, c, Axis::Rows);
    let s4 = tape.synthesize(d, row.g, r, c, Axis::Rows);
    let hc = tape.add(s3, s4);
    let y1 = tape.synthesize(lc, col.h, r, 2 * c, Axis::Cols);
    let y2 = tape.synthesize(hc, col.g, r, 2 * c, Axis::Cols);
    tape.add(y1, y2)
}

fn butterfly(tape: &mut Tape, a: Var, b: Var) -> (Var, Var) {
    let s = tape.add(a, b);
    let d = tape.sub(a, b);
    (tape.scale(s, FRAC_1_SQRT_2), tape.scale(d, FRAC_1_SQRT_2))
}

fn butterfly3(tape: &mut Tape, a: [Var; 3], b: [Var; 3]) -> ([Var; 3], [Var; 3]) {
    let (h1, h2) = butterfly(tape, a[0], b[0]);
    let (v1, v2) = butterfly(tape, a[1], b[1]);
    let (d1, d2) = butterfly(tape, a[2], b[2]);
    ([h1, v1, d1], [h2, v2, d2])
}

/// Forward dual-tree transform of the `rows x cols` image in node `x`.
pub fn forward(tape: &mut Tape, fv: &FilterVars, x: Var, rows: usize, cols: usize, levels: usize, variant: Variant) -> DualTape {
    let pairs = tree_pairs(variant);
    let mut approx: Vec<Var> = vec![x; pairs.len()];
    let mut groups = Vec::with_capacity(levels);
    for level in 1..=levels {
        let (r, c) = (rows >> (level - 1), cols >> (level - 1));
        let mut raw = Vec::with_capacity(pairs.len());
        for (t, &(rt, ct)) in pairs.iter().enumerate() {
            let (a, b) = analyze_level(tape, approx[t], r, c, fv.tree(rt).at(level), fv.tree(ct).at(level));
            approx[t] = a;
            raw.push(b);
        }
        let mut out = vec![[x; 3]; pairs.len()];
        for (p, &(i, j)) in butterfly_pairs(variant).iter().enumerate() {
            let (s, d) = butterfly3(tape, raw[i], raw[j]);
            out[2 * p] = s;
            out[2 * p + 1] = d;
        }
        groups.push(out);
    }
    DualTape { rows, cols, groups, approx }
}

/// Inverse of [`forward`]: undo the butterflies, invert every tree and
/// average.
pub fn inverse(tape: &mut Tape, fv: &FilterVars, p: &DualTape, variant: Variant) -> Var {
    let pairs = tree_pairs(variant);
    let levels = p.levels();
    let mut approx = p.approx.clone();
    for level in (1..=levels).rev() {
        let (r, c) = (p.rows >> level, p.cols >> level);
        let mut raw = vec![p.groups[level - 1][0]; pairs.len()];
        for (q, &(i, j)) in butterfly_pairs(variant).iter().enumerate() {
            let (a, b) = butterfly3(tape, p.groups[level - 1][2 * q], p.groups[level - 1][2 * q + 1]);
            raw[i] = a;
            raw[j] = b;
        }
        for (t, &(rt, ct)) in pairs.iter().enumerate() {
            approx[t] = synthesize_level(tape, approx[t], raw[t], r, c, fv.tree(rt).at(level), fv.tree(ct).at(level));
        }
    }
    let sum = tape.add_all(&approx);
    tape.scale(sum, 1.0 / pairs.len() as f64)
}
