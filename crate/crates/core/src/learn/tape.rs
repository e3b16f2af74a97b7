//! A small reverse-mode tape over whole arrays.
//!
//! Every node owns its value. Operands always precede the node that uses
//! them, so one backward sweep in reverse insertion order is enough.

use crate::error::{Error, Result};
use crate::multirate::{analyze, filter_correlation, synthesize_add, Axis};
use crate::signal::Image;

/// Handle to a tape node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Reverse(Var),
    Mirror(Var),
    /// Decimating correlation of `x` (shape `rows x cols`) with filter `f`.
    Analyze { x: Var, f: Var, rows: usize, cols: usize, axis: Axis },
    /// Upsampling convolution of `c` (shape `rows x cols`) with filter `f`.
    Synthesize { c: Var, f: Var, rows: usize, cols: usize, axis: Axis },
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    Offset(Var),
    Sum(Var),
    Mean(Var),
    SumSq(Var),
    AbsSum(Var),
    Norm(Var),
}

impl Op {
    fn name(&self) -> &'static str {
        match self {
            Op::Leaf => "leaf",
            Op::Reverse(_) => "reverse",
            Op::Mirror(_) => "mirror",
            Op::Analyze { .. } => "analyze",
            Op::Synthesize { .. } => "synthesize",
            Op::Add(..) => "add",
            Op::Sub(..) => "sub",
            Op::Mul(..) => "mul",
            Op::Scale(..) => "scale",
            Op::Offset(..) => "offset",
            Op::Sum(_) => "sum",
            Op::Mean(_) => "mean",
            Op::SumSq(_) => "sum_sq",
            Op::AbsSum(_) => "abs_sum",
            Op::Norm(_) => "norm",
        }
    }
}

struct Node {
    op: Op,
    value: Vec<f64>,
}

/// Append-only record of array operations.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients of one scalar output with respect to every node.
pub struct Gradients {
    grads: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn wrt(&self, v: Var) -> &[f64] {
        &self.grads[v.0]
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, op: Op, value: Vec<f64>) -> Var {
        self.nodes.push(Node { op, value });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].value
    }

    pub fn scalar(&self, v: Var) -> f64 {
        self.nodes[v.0].value[0]
    }

    pub fn leaf(&mut self, value: Vec<f64>) -> Var {
        self.push(Op::Leaf, value)
    }

    pub fn image(&mut self, img: &Image) -> Var {
        self.leaf(img.data().to_vec())
    }

    pub fn zeros(&mut self, n: usize) -> Var {
        self.leaf(vec![0.0; n])
    }

    pub fn reverse(&mut self, f: Var) -> Var {
        let v = self.value(f).iter().rev().copied().collect();
        self.push(Op::Reverse(f), v)
    }

    /// QMF wavelet filter of `h`.
    pub fn mirror(&mut self, h: Var) -> Var {
        let v = crate::filter::mirror_taps(self.value(h));
        self.push(Op::Mirror(h), v)
    }

    pub fn analyze(&mut self, x: Var, f: Var, rows: usize, cols: usize, axis: Axis) -> Var {
        let v = analyze(self.value(x), rows, cols, self.value(f), axis);
        self.push(Op::Analyze { x, f, rows, cols, axis }, v)
    }

    pub fn synthesize(&mut self, c: Var, f: Var, rows: usize, cols: usize, axis: Axis) -> Var {
        let mut v = vec![0.0; rows * cols * 2];
        synthesize_add(self.value(c), rows, cols, self.value(f), axis, &mut v);
        self.push(Op::Synthesize { c, f, rows, cols, axis }, v)
    }

    fn zip(&self, a: Var, b: Var, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let (x, y) = (self.value(a), self.value(b));
        debug_assert_eq!(x.len(), y.len());
        x.iter().zip(y).map(|(p, q)| f(*p, *q)).collect()
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let v = self.zip(a, b, |p, q| p + q);
        self.push(Op::Add(a, b), v)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        let v = self.zip(a, b, |p, q| p - q);
        self.push(Op::Sub(a, b), v)
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let v = self.zip(a, b, |p, q| p * q);
        self.push(Op::Mul(a, b), v)
    }

    pub fn scale(&mut self, a: Var, s: f64) -> Var {
        let v = self.value(a).iter().map(|x| x * s).collect();
        self.push(Op::Scale(a, s), v)
    }

    pub fn offset(&mut self, a: Var, c: f64) -> Var {
        let v = self.value(a).iter().map(|x| x + c).collect();
        self.push(Op::Offset(a), v)
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let v = vec![self.value(a).iter().sum()];
        self.push(Op::Sum(a), v)
    }

    pub fn mean(&mut self, a: Var) -> Var {
        let x = self.value(a);
        let v = vec![x.iter().sum::<f64>() / x.len() as f64];
        self.push(Op::Mean(a), v)
    }

    pub fn sum_sq(&mut self, a: Var) -> Var {
        let v = vec![self.value(a).iter().map(|x| x * x).sum()];
        self.push(Op::SumSq(a), v)
    }

    pub fn abs_sum(&mut self, a: Var) -> Var {
        let v = vec![self.value(a).iter().map(|x| x.abs()).sum()];
        self.push(Op::AbsSum(a), v)
    }

    pub fn norm(&mut self, a: Var) -> Var {
        let v = vec![crate::signal::norm(self.value(a))];
        self.push(Op::Norm(a), v)
    }

    /// `a²` for any shape.
    pub fn square(&mut self, a: Var) -> Var {
        self.mul(a, a)
    }

    /// Sum of scalar nodes.
    pub fn add_all(&mut self, terms: &[Var]) -> Var {
        let mut acc = terms[0];
        for &t in &terms[1..] {
            acc = self.add(acc, t);
        }
        acc
    }

    /// First node holding a NaN or infinity.
    pub fn check_finite(&self) -> Result<()> {
        for (i, n) in self.nodes.iter().enumerate() {
            if n.value.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { node: i, op: n.op.name() });
            }
        }
        Ok(())
    }

    /// Reverse sweep from scalar `out`.
    pub fn backward(&self, out: Var) -> Result<Gradients> {
        self.check_finite()?;
        let mut g: Vec<Vec<f64>> = self.nodes.iter().map(|n| vec![0.0; n.value.len()]).collect();
        g[out.0] = vec![1.0; self.nodes[out.0].value.len()];
        for i in (0..=out.0).rev() {
            let gout = std::mem::take(&mut g[i]);
            if gout.iter().all(|&v| v == 0.0) {
                g[i] = gout;
                continue;
            }
            if gout.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { node: i, op: self.nodes[i].op.name() });
            }
            self.vjp(i, &gout, &mut g);
            g[i] = gout;
        }
        Ok(Gradients { grads: g })
    }

    fn vjp(&self, i: usize, gout: &[f64], g: &mut [Vec<f64>]) {
        let val = |v: Var| -> &[f64] { &self.nodes[v.0].value };
        match self.nodes[i].op {
            Op::Leaf => {}
            Op::Reverse(a) => {
                for (d, s) in g[a.0].iter_mut().zip(gout.iter().rev()) {
                    *d += s;
                }
            }
            Op::Mirror(a) => {
                let k = gout.len();
                for (n, s) in gout.iter().enumerate() {
                    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                    g[a.0][k - 1 - n] += sign * s;
                }
            }
            Op::Analyze { x, f, rows, cols, axis } => {
                let (hr, hc) = axis.halved(rows, cols);
                synthesize_add(gout, hr, hc, val(f), axis, &mut g[x.0]);
                let df = filter_correlation(val(x), rows, cols, gout, val(f).len(), axis);
                add_into(&mut g[f.0], &df);
            }
            Op::Synthesize { c, f, rows, cols, axis } => {
                let (fr, fc) = axis.doubled(rows, cols);
                let dc = analyze(gout, fr, fc, val(f), axis);
                add_into(&mut g[c.0], &dc);
                let df = filter_correlation(gout, fr, fc, val(c), val(f).len(), axis);
                add_into(&mut g[f.0], &df);
            }
            Op::Add(a, b) => {
                add_into(&mut g[a.0], gout);
                add_into(&mut g[b.0], gout);
            }
            Op::Sub(a, b) => {
                add_into(&mut g[a.0], gout);
                for (d, s) in g[b.0].iter_mut().zip(gout) {
                    *d -= s;
                }
            }
            Op::Mul(a, b) => {
                let (va, vb) = (val(a).to_vec(), val(b).to_vec());
                for ((d, s), y) in g[a.0].iter_mut().zip(gout).zip(&vb) {
                    *d += s * y;
                }
                for ((d, s), x) in g[b.0].iter_mut().zip(gout).zip(&va) {
                    *d += s * x;
                }
            }
            Op::Scale(a, s) => {
                for (d, v) in g[a.0].iter_mut().zip(gout) {
                    *d += s * v;
                }
            }
            Op::Offset(a) => add_into(&mut g[a.0], gout),
            Op::Sum(a) => g[a.0].iter_mut().for_each(|d| *d += gout[0]),
            Op::Mean(a) => {
                let n = g[a.0].len() as f64;
                g[a.0].iter_mut().for_each(|d| *d += gout[0] / n);
            }
            Op::SumSq(a) => {
                for (d, x) in g[a.0].iter_mut().zip(val(a)) {
                    *d += 2.0 * x * gout[0];
                }
            }
            Op::AbsSum(a) => {
                for (d, x) in g[a.0].iter_mut().zip(val(a)) {
                    *d += if *x > 0.0 {
                        gout[0]
                    } else if *x < 0.0 {
                        -gout[0]
                    } else {
                        0.0
                    };
                }
            }
            Op::Norm(a) => {
                let n = self.nodes[i].value[0];
                if n > 0.0 {
                    for (d, x) in g[a.0].iter_mut().zip(val(a)) {
                        *d += x / n * gout[0];
                    }
                }
            }
        }
    }
}

fn add_into(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fd(f: impl Fn(&[f64]) -> f64, x: &[f64], i: usize) -> f64 {
        let h = 1e-6;
        let mut p = x.to_vec();
        let mut m = x.to_vec();
        p[i] += h;
        m[i] -= h;
        (f(&p) - f(&m)) / (2.0 * h)
    }

    #[test]
    fn gradient_of_squared_norm() {
        let mut t = Tape::new();
        let h = t.leaf(vec![0.3, -1.2, 0.5, 2.0]);
        let l = t.sum_sq(h);
        let g = t.backward(l).unwrap();
        assert_eq!(g.wrt(h), &[0.6, -2.4, 1.0, 4.0]);
    }

    #[test]
    fn non_finite_names_the_node() {
        let mut t = Tape::new();
        let a = t.leaf(vec![1.0, 2.0]);
        let b = t.scale(a, f64::INFINITY);
        let c = t.sum(b);
        match t.backward(c) {
            Err(Error::NonFinite { node, op }) => {
                assert_eq!(node, b.index());
                assert_eq!(op, "scale");
            }
            other => panic!("{:?}", other.err()),
        }
    }

    fn analysis_loss(x: &[f64], f: &[f64], axis: Axis) -> f64 {
        let y = analyze(x, 4, 8, f, axis);
        let (r, c) = axis.halved(4, 8);
        let mut z = vec![0.0; 32];
        synthesize_add(&y.iter().map(|v| v * v).collect::<Vec<_>>(), r, c, f, axis, &mut z);
        z.iter().enumerate().map(|(i, a)| a * (i as f64).sin()).sum()
    }

    #[test]
    fn analysis_and_synthesis_vjps_match_differences() {
        for axis in [Axis::Rows, Axis::Cols] {
            let x: Vec<f64> = (0..32).map(|i| ((i * 7 % 11) as f64 - 5.0) / 5.0).collect();
            let f = vec![0.2, -0.4, 0.9, 0.3, -0.1, 0.05];
            let mut t = Tape::new();
            let xv = t.leaf(x.clone());
            let fv = t.leaf(f.clone());
            let y = t.analyze(xv, fv, 4, 8, axis);
            let y2 = t.square(y);
            let (r, c) = axis.halved(4, 8);
            let z = t.synthesize(y2, fv, r, c, axis);
            let sx = t.leaf((0..32).map(|i| (i as f64).sin()).collect());
            let p = t.mul(z, sx);
            let l = t.sum(p);
            assert!((t.scalar(l) - analysis_loss(&x, &f, axis)).abs() < 1e-12);
            let g = t.backward(l).unwrap();
            for i in 0..f.len() {
                let want = fd(|ff| analysis_loss(&x, ff, axis), &f, i);
                assert!((g.wrt(fv)[i] - want).abs() < 1e-6 * want.abs().max(1.0), "{axis:?} f{i}");
            }
            for i in 0..x.len() {
                let want = fd(|xx| analysis_loss(xx, &f, axis), &x, i);
                assert!((g.wrt(xv)[i] - want).abs() < 1e-6 * want.abs().max(1.0), "{axis:?} x{i}");
            }
        }
    }

    #[test]
    fn scalar_ops() {
        let mut t = Tape::new();
        let h = t.leaf(vec![3.0, 4.0]);
        let n = t.norm(h);
        let o = t.offset(n, -1.0);
        let sq = t.square(o); // (‖h‖ − 1)² = 16
        let m = t.mean(h);
        let a = t.abs_sum(h);
        let total = t.add_all(&[sq, m, a]);
        assert_eq!(t.scalar(total), 16.0 + 3.5 + 7.0);
        let g = t.backward(total).unwrap();
        // d/dh: 2(‖h‖−1)·h/‖h‖ + 1/2 + sign(h)
        assert!((g.wrt(h)[0] - (8.0 * 0.6 + 0.5 + 1.0)).abs() < 1e-12);
        assert!((g.wrt(h)[1] - (8.0 * 0.8 + 0.5 + 1.0)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn derived_filter_chain_is_exact(taps in prop::collection::vec(-1.0f64..1.0, 6), w in prop::collection::vec(-1.0f64..1.0, 6)) {
            // L = ⟨w, mirror(reverse(h))⟩ is linear in h; its gradient is the
            // transpose map applied to w.
            let mut t = Tape::new();
            let h = t.leaf(taps.clone());
            let r = t.reverse(h);
            let g = t.mirror(r);
            let wv = t.leaf(w.clone());
            let p = t.mul(g, wv);
            let l = t.sum(p);
            let grads = t.backward(l).unwrap();
            // mirror(reverse(h))[n] = (−1)^n h[n]
            for (n, wn) in w.iter().enumerate() {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                prop_assert!((grads.wrt(h)[n] - sign * wn).abs() <= 1e-12);
            }
        }
    }
}
