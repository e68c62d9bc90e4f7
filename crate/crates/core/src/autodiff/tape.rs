//! Reverse-mode tape over dense matrices.
//!
//! Every op appends a node holding its value and inputs. `backward` walks the
//! tape in reverse and accumulates gradients into the parameter tensors the
//! leaves were created from.

use std::sync::Arc;

use super::sparse::{Csr, Segments};
use super::special::{digamma, lgamma, trigamma};
use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Param(usize),
    MatMul(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    AddRow(Var, Var),
    AddScalar(Var),
    Scale(Var, f64),
    Relu(Var),
    Tanh(Var),
    SignedLog1p(Var),
    Softplus(Var),
    Exp(Var),
    Log(Var),
    Lgamma(Var),
    Digamma(Var),
    SoftmaxRows(Var),
    LogSoftmaxRows(Var),
    LogSumExpRows(Var),
    SpMM(Arc<Csr>, Var),
    SegmentSum(Arc<Segments>, Var),
    SegmentMean(Arc<Segments>, Var),
    SliceCols(Var, usize),
    Sum(Var),
    Mean(Var),
}

#[derive(Debug, Clone)]
struct Node {
    rows: usize,
    cols: usize,
    value: Vec<f64>,
    op: Op,
    needs_grad: bool,
}

#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

fn dim_err(op: &'static str, detail: String) -> Error {
    Error::Dimension { op, detail }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `c += a * b` for row-major `a: n x k`, `b: k x m`.
fn gemm_acc(a: &[f64], b: &[f64], c: &mut [f64], n: usize, k: usize, m: usize) {
    for i in 0..n {
        let ci = &mut c[i * m..(i + 1) * m];
        for p in 0..k {
            let aip = a[i * k + p];
            if aip == 0.0 {
                continue;
            }
            let bp = &b[p * m..(p + 1) * m];
            for (cv, bv) in ci.iter_mut().zip(bp) {
                *cv += aip * bv;
            }
        }
    }
}

/// `c += a * bᵀ` for `a: n x m`, `b: k x m`, `c: n x k`.
fn gemm_nt_acc(a: &[f64], b: &[f64], c: &mut [f64], n: usize, m: usize, k: usize) {
    for i in 0..n {
        let ai = &a[i * m..(i + 1) * m];
        for j in 0..k {
            let bj = &b[j * m..(j + 1) * m];
            c[i * k + j] += ai.iter().zip(bj).map(|(x, y)| x * y).sum::<f64>();
        }
    }
}

/// `c += aᵀ * b` for `a: n x k`, `b: n x m`, `c: k x m`.
fn gemm_tn_acc(a: &[f64], b: &[f64], c: &mut [f64], n: usize, k: usize, m: usize) {
    for i in 0..n {
        let bi = &b[i * m..(i + 1) * m];
        for p in 0..k {
            let aip = a[i * k + p];
            if aip == 0.0 {
                continue;
            }
            let cp = &mut c[p * m..(p + 1) * m];
            for (cv, bv) in cp.iter_mut().zip(bi) {
                *cv += aip * bv;
            }
        }
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, rows: usize, cols: usize, value: Vec<f64>, op: Op, needs_grad: bool) -> Var {
        debug_assert_eq!(value.len(), rows * cols);
        self.nodes.push(Node {
            rows,
            cols,
            value,
            op,
            needs_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn node(&self, v: Var) -> &Node {
        &self.nodes[v.0]
    }

    pub fn shape(&self, v: Var) -> (usize, usize) {
        let n = self.node(v);
        (n.rows, n.cols)
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.node(v).value
    }

    pub fn scalar(&self, v: Var) -> f64 {
        self.node(v).value[0]
    }

    pub fn to_tensor(&self, v: Var) -> Tensor {
        let n = self.node(v);
        Tensor::new(n.rows, n.cols, n.value.clone()).expect("consistent node")
    }

    /// Constant input; never receives a gradient.
    pub fn input(&mut self, t: &Tensor) -> Var {
        self.push(t.rows, t.cols, t.values.clone(), Op::Leaf, false)
    }

    pub fn constant(&mut self, rows: usize, cols: usize, values: Vec<f64>) -> Result<Var> {
        if values.len() != rows * cols {
            return Err(dim_err(
                "constant",
                format!("{} values for {rows}x{cols}", values.len()),
            ));
        }
        Ok(self.push(rows, cols, values, Op::Leaf, false))
    }

    /// Leaf bound to `params[slot]`; gradients flow back into that tensor.
    pub fn param(&mut self, slot: usize, t: &Tensor) -> Var {
        let needs = t.requires_grad;
        self.push(t.rows, t.cols, t.values.clone(), Op::Param(slot), needs)
    }

    fn unary(&mut self, x: Var, f: impl Fn(f64) -> f64, op: Op) -> Var {
        let n = self.node(x);
        let (r, c, ng) = (n.rows, n.cols, n.needs_grad);
        let value = n.value.iter().map(|&v| f(v)).collect();
        self.push(r, c, value, op, ng)
    }

    fn same_shape(&self, op: &'static str, a: Var, b: Var) -> Result<()> {
        if self.shape(a) != self.shape(b) {
            return Err(dim_err(
                op,
                format!("{:?} vs {:?}", self.shape(a), self.shape(b)),
            ));
        }
        Ok(())
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let ((n, k), (k2, m)) = (self.shape(a), self.shape(b));
        if k != k2 {
            return Err(dim_err("matmul", format!("{n}x{k} * {k2}x{m}")));
        }
        let mut out = vec![0.0; n * m];
        gemm_acc(&self.node(a).value, &self.node(b).value, &mut out, n, k, m);
        let ng = self.node(a).needs_grad || self.node(b).needs_grad;
        Ok(self.push(n, m, out, Op::MatMul(a, b), ng))
    }

    fn zip(
        &mut self,
        op_name: &'static str,
        a: Var,
        b: Var,
        f: impl Fn(f64, f64) -> f64,
        op: Op,
    ) -> Result<Var> {
        self.same_shape(op_name, a, b)?;
        let (r, c) = self.shape(a);
        let value = self
            .node(a)
            .value
            .iter()
            .zip(&self.node(b).value)
            .map(|(&x, &y)| f(x, y))
            .collect();
        let ng = self.node(a).needs_grad || self.node(b).needs_grad;
        Ok(self.push(r, c, value, op, ng))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip("add", a, b, |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip("sub", a, b, |x, y| x - y, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip("mul", a, b, |x, y| x * y, Op::Mul(a, b))
    }

    /// Adds the `1 x c` row vector `row` to every row of `a`.
    pub fn row_broadcast_add(&mut self, a: Var, row: Var) -> Result<Var> {
        let ((r, c), (rr, rc)) = (self.shape(a), self.shape(row));
        if rr != 1 || rc != c {
            return Err(dim_err("row_broadcast_add", format!("{r}x{c} + {rr}x{rc}")));
        }
        let rv = &self.node(row).value;
        let value = self
            .node(a)
            .value
            .chunks(c.max(1))
            .flat_map(|chunk| chunk.iter().zip(rv).map(|(x, y)| x + y))
            .collect::<Vec<_>>();
        let value = if c == 0 { Vec::new() } else { value };
        let ng = self.node(a).needs_grad || self.node(row).needs_grad;
        Ok(self.push(r, c, value, Op::AddRow(a, row), ng))
    }

    pub fn add_scalar(&mut self, a: Var, s: f64) -> Var {
        self.unary(a, |x| x + s, Op::AddScalar(a))
    }

    pub fn scale(&mut self, a: Var, s: f64) -> Var {
        self.unary(a, |x| x * s, Op::Scale(a, s))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        self.unary(a, |x| x.max(0.0), Op::Relu(a))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        self.unary(a, f64::tanh, Op::Tanh(a))
    }

    /// `sign(x) * ln(1 + |x|)`, used to compress heavy-tailed embeddings.
    pub fn signed_log1p(&mut self, a: Var) -> Var {
        self.unary(a, |x| x.signum() * x.abs().ln_1p(), Op::SignedLog1p(a))
    }

    pub fn softplus(&mut self, a: Var) -> Var {
        self.unary(a, softplus, Op::Softplus(a))
    }

    pub fn exp(&mut self, a: Var) -> Var {
        self.unary(a, f64::exp, Op::Exp(a))
    }

    pub fn log(&mut self, a: Var) -> Var {
        self.unary(a, f64::ln, Op::Log(a))
    }

    pub fn lgamma(&mut self, a: Var) -> Var {
        self.unary(a, lgamma, Op::Lgamma(a))
    }

    pub fn digamma(&mut self, a: Var) -> Var {
        self.unary(a, digamma, Op::Digamma(a))
    }

    fn row_reduce(
        &mut self,
        a: Var,
        f: impl Fn(&[f64], &mut Vec<f64>),
        out_cols: Option<usize>,
        op: Op,
    ) -> Var {
        let n = self.node(a);
        let (r, c, ng) = (n.rows, n.cols, n.needs_grad);
        let mut value = Vec::with_capacity(r * out_cols.unwrap_or(c));
        for row in n.value.chunks(c.max(1)).take(r) {
            f(row, &mut value);
        }
        self.push(r, out_cols.unwrap_or(c), value, op, ng)
    }

    pub fn softmax_rows(&mut self, a: Var) -> Var {
        self.row_reduce(
            a,
            |row, out| {
                let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let s: f64 = row.iter().map(|x| (x - m).exp()).sum();
                out.extend(row.iter().map(|x| (x - m).exp() / s));
            },
            None,
            Op::SoftmaxRows(a),
        )
    }

    pub fn log_softmax_rows(&mut self, a: Var) -> Var {
        self.row_reduce(
            a,
            |row, out| {
                let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lse = m + row.iter().map(|x| (x - m).exp()).sum::<f64>().ln();
                out.extend(row.iter().map(|x| x - lse));
            },
            None,
            Op::LogSoftmaxRows(a),
        )
    }

    /// `n x c -> n x 1` log-sum-exp per row.
    pub fn logsumexp_rows(&mut self, a: Var) -> Var {
        self.row_reduce(
            a,
            |row, out| {
                let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                out.push(if m == f64::NEG_INFINITY {
                    m
                } else {
                    m + row.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
                });
            },
            Some(1),
            Op::LogSumExpRows(a),
        )
    }

    /// Sparse-dense product `A x`.
    pub fn spmm(&mut self, adj: &Arc<Csr>, x: Var) -> Result<Var> {
        let (r, c) = self.shape(x);
        if adj.n != r {
            return Err(dim_err("spmm", format!("{0}x{0} * {r}x{c}", adj.n)));
        }
        let mut out = vec![0.0; r * c];
        adj.mul_into(&self.node(x).value, c, &mut out);
        let ng = self.node(x).needs_grad;
        Ok(self.push(r, c, out, Op::SpMM(Arc::clone(adj), x), ng))
    }

    fn segment_reduce(&mut self, seg: &Arc<Segments>, x: Var, mean: bool) -> Result<Var> {
        let name = if mean { "segment_mean" } else { "segment_sum" };
        let (r, c) = self.shape(x);
        if seg.ids.len() != r {
            return Err(dim_err(
                name,
                format!("{} segment ids for {r} rows", seg.ids.len()),
            ));
        }
        let mut out = vec![0.0; seg.count * c];
        let xv = &self.node(x).value;
        for (row, &s) in seg.ids.iter().enumerate() {
            for j in 0..c {
                out[s * c + j] += xv[row * c + j];
            }
        }
        if mean {
            for s in 0..seg.count {
                if seg.sizes[s] > 0 {
                    let inv = 1.0 / seg.sizes[s] as f64;
                    out[s * c..(s + 1) * c].iter_mut().for_each(|v| *v *= inv);
                }
            }
        }
        let ng = self.node(x).needs_grad;
        let op = if mean {
            Op::SegmentMean(Arc::clone(seg), x)
        } else {
            Op::SegmentSum(Arc::clone(seg), x)
        };
        Ok(self.push(seg.count, c, out, op, ng))
    }

    pub fn segment_sum(&mut self, seg: &Arc<Segments>, x: Var) -> Result<Var> {
        self.segment_reduce(seg, x, false)
    }

    pub fn segment_mean(&mut self, seg: &Arc<Segments>, x: Var) -> Result<Var> {
        self.segment_reduce(seg, x, true)
    }

    /// Columns `start..start + len`.
    pub fn slice_cols(&mut self, a: Var, start: usize, len: usize) -> Result<Var> {
        let (r, c) = self.shape(a);
        if start + len > c {
            return Err(dim_err(
                "slice_cols",
                format!("{start}..{} of {c} columns", start + len),
            ));
        }
        let src = &self.node(a).value;
        let mut out = Vec::with_capacity(r * len);
        for i in 0..r {
            out.extend_from_slice(&src[i * c + start..i * c + start + len]);
        }
        let ng = self.node(a).needs_grad;
        Ok(self.push(r, len, out, Op::SliceCols(a, start), ng))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.node(a).value.iter().sum();
        let ng = self.node(a).needs_grad;
        self.push(1, 1, vec![s], Op::Sum(a), ng)
    }

    pub fn mean(&mut self, a: Var) -> Var {
        let n = self.node(a).value.len().max(1) as f64;
        let s = self.node(a).value.iter().sum::<f64>() / n;
        let ng = self.node(a).needs_grad;
        self.push(1, 1, vec![s], Op::Mean(a), ng)
    }

    /// Reverse sweep from the scalar `loss`, accumulating into `params[slot]`
    /// for every parameter leaf that requires a gradient.
    pub fn backward(&self, loss: Var, params: &mut [Tensor]) -> Result<()> {
        if self.shape(loss) != (1, 1) {
            return Err(Error::Contract(format!(
                "backward needs a scalar loss, got {:?}",
                self.shape(loss)
            )));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; loss.0 + 1];
        grads[loss.0] = Some(vec![1.0]);
        for id in (0..=loss.0).rev() {
            let Some(g) = grads[id].take() else { continue };
            let node = &self.nodes[id];
            if !node.needs_grad {
                continue;
            }
            self.propagate(node, &g, &mut grads, params)?;
        }
        Ok(())
    }

    fn propagate(
        &self,
        node: &Node,
        g: &[f64],
        grads: &mut [Option<Vec<f64>>],
        params: &mut [Tensor],
    ) -> Result<()> {
        let needs = |v: Var| self.nodes[v.0].needs_grad;
        let mut acc = |v: Var, f: &mut dyn FnMut(&mut [f64])| {
            if !needs(v) {
                return;
            }
            let len = self.nodes[v.0].value.len();
            let slot = grads[v.0].get_or_insert_with(|| vec![0.0; len]);
            f(slot);
        };
        let val = |v: Var| &self.nodes[v.0].value;
        match &node.op {
            Op::Leaf => {}
            Op::Param(slot) => {
                let t = params.get_mut(*slot).ok_or_else(|| {
                    Error::Contract(format!("parameter slot {slot} missing in backward"))
                })?;
                if t.len() != g.len() {
                    return Err(dim_err(
                        "backward",
                        format!("parameter slot {slot} changed shape"),
                    ));
                }
                t.accumulate_grad(g);
            }
            Op::MatMul(a, b) => {
                let ((n, k), (_, m)) = (self.shape(*a), self.shape(*b));
                acc(*a, &mut |ga| gemm_nt_acc(g, val(*b), ga, n, m, k));
                acc(*b, &mut |gb| gemm_tn_acc(val(*a), g, gb, n, k, m));
            }
            Op::Add(a, b) => {
                acc(*a, &mut |ga| {
                    ga.iter_mut().zip(g).for_each(|(x, y)| *x += y)
                });
                acc(*b, &mut |gb| {
                    gb.iter_mut().zip(g).for_each(|(x, y)| *x += y)
                });
            }
            Op::Sub(a, b) => {
                acc(*a, &mut |ga| {
                    ga.iter_mut().zip(g).for_each(|(x, y)| *x += y)
                });
                acc(*b, &mut |gb| {
                    gb.iter_mut().zip(g).for_each(|(x, y)| *x -= y)
                });
            }
            Op::Mul(a, b) => {
                acc(*a, &mut |ga| {
                    for ((x, y), z) in ga.iter_mut().zip(g).zip(val(*b)) {
                        *x += y * z;
                    }
                });
                acc(*b, &mut |gb| {
                    for ((x, y), z) in gb.iter_mut().zip(g).zip(val(*a)) {
                        *x += y * z;
                    }
                });
            }
            Op::AddRow(a, row) => {
                acc(*a, &mut |ga| {
                    ga.iter_mut().zip(g).for_each(|(x, y)| *x += y)
                });
                let c = node.cols;
                acc(*row, &mut |gr| {
                    for chunk in g.chunks(c.max(1)) {
                        gr.iter_mut().zip(chunk).for_each(|(x, y)| *x += y);
                    }
                });
            }
            Op::AddScalar(a) => acc(*a, &mut |ga| {
                ga.iter_mut().zip(g).for_each(|(x, y)| *x += y)
            }),
            Op::Scale(a, s) => acc(*a, &mut |ga| {
                ga.iter_mut().zip(g).for_each(|(x, y)| *x += s * y)
            }),
            Op::Relu(a) => acc(*a, &mut |ga| {
                for ((x, y), v) in ga.iter_mut().zip(g).zip(val(*a)) {
                    if *v > 0.0 {
                        *x += y;
                    }
                }
            }),
            Op::Tanh(_) | Op::Exp(_) => {
                let a = match node.op {
                    Op::Tanh(a) | Op::Exp(a) => a,
                    _ => unreachable!(),
                };
                let tanh = matches!(node.op, Op::Tanh(_));
                acc(a, &mut |ga| {
                    for ((x, y), out) in ga.iter_mut().zip(g).zip(&node.value) {
                        *x += y * if tanh { 1.0 - out * out } else { *out };
                    }
                })
            }
            Op::SignedLog1p(a) => acc(*a, &mut |ga| {
                for ((x, y), v) in ga.iter_mut().zip(g).zip(val(*a)) {
                    *x += y / (1.0 + v.abs());
                }
            }),
            Op::Softplus(a) => acc(*a, &mut |ga| {
                for ((x, y), v) in ga.iter_mut().zip(g).zip(val(*a)) {
                    *x += y * sigmoid(*v);
                }
            }),
            Op::Log(a) => acc(*a, &mut |ga| {
                for ((x, y), v) in ga.iter_mut().zip(g).zip(val(*a)) {
                    *x += y / v;
                }
            }),
            Op::Lgamma(a) => acc(*a, &mut |ga| {
                for ((x, y), v) in ga.iter_mut().zip(g).zip(val(*a)) {
                    *x += y * digamma(*v);
                }
            }),
            Op::Digamma(a) => acc(*a, &mut |ga| {
                for ((x, y), v) in ga.iter_mut().zip(g).zip(val(*a)) {
                    *x += y * trigamma(*v);
                }
            }),
            Op::SoftmaxRows(a) => {
                let c = node.cols.max(1);
                acc(*a, &mut |ga| {
                    for ((gx, gy), s) in ga.chunks_mut(c).zip(g.chunks(c)).zip(node.value.chunks(c))
                    {
                        let dot: f64 = gy.iter().zip(s).map(|(u, v)| u * v).sum();
                        for j in 0..gx.len() {
                            gx[j] += s[j] * (gy[j] - dot);
                        }
                    }
                })
            }
            Op::LogSoftmaxRows(a) => {
                let c = node.cols.max(1);
                acc(*a, &mut |ga| {
                    for ((gx, gy), ls) in
                        ga.chunks_mut(c).zip(g.chunks(c)).zip(node.value.chunks(c))
                    {
                        let total: f64 = gy.iter().sum();
                        for j in 0..gx.len() {
                            gx[j] += gy[j] - ls[j].exp() * total;
                        }
                    }
                })
            }
            Op::LogSumExpRows(a) => {
                let c = self.nodes[a.0].cols.max(1);
                acc(*a, &mut |ga| {
                    for (r, (gx, xs)) in ga.chunks_mut(c).zip(val(*a).chunks(c)).enumerate() {
                        let lse = node.value[r];
                        if lse == f64::NEG_INFINITY {
                            continue;
                        }
                        for j in 0..gx.len() {
                            gx[j] += g[r] * (xs[j] - lse).exp();
                        }
                    }
                })
            }
            Op::SpMM(adj, x) => {
                let c = node.cols;
                acc(*x, &mut |gx| adj.mul_transpose_into(g, c, gx));
            }
            Op::SegmentSum(seg, x) | Op::SegmentMean(seg, x) => {
                let c = node.cols;
                let mean = matches!(node.op, Op::SegmentMean(..));
                acc(*x, &mut |gx| {
                    for (row, &s) in seg.ids.iter().enumerate() {
                        let scale = if mean { 1.0 / seg.sizes[s] as f64 } else { 1.0 };
                        for j in 0..c {
                            gx[row * c + j] += scale * g[s * c + j];
                        }
                    }
                })
            }
            Op::SliceCols(a, start) => {
                let (src_c, len) = (self.nodes[a.0].cols, node.cols);
                acc(*a, &mut |ga| {
                    for i in 0..node.rows {
                        for j in 0..len {
                            ga[i * src_c + start + j] += g[i * len + j];
                        }
                    }
                })
            }
            Op::Sum(a) => acc(*a, &mut |ga| ga.iter_mut().for_each(|x| *x += g[0])),
            Op::Mean(a) => {
                let n = self.nodes[a.0].value.len().max(1) as f64;
                acc(*a, &mut |ga| ga.iter_mut().for_each(|x| *x += g[0] / n))
            }
        }
        Ok(())
    }
}
