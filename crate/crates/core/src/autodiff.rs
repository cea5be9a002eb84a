//! Reverse-mode autodiff over dense f64 tensors.
//!
//! A [`Tape`] records primitives in an append-only list; insertion order is
//! the topological order, and [`Tape::backward`] walks it once in reverse.
//! Sparse filter products treat the filter as a constant: gradients flow
//! through the dense operand only.
//!
//! Every primitive checks its output for NaN/Inf and fails fast instead of
//! letting a diverged run limp along. Dropout draws from the tape's own
//! seeded RNG, so replaying a tape with the same seed is bit-deterministic.

use crate::error::{Error, Result};
use crate::filter::CsrMatrix;
use crate::tensor::{matmul, matmul_nt, matmul_tn, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Handle to a tape node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

enum Op {
    Leaf,
    Matmul(Var, Var),
    Spmm { m: Arc<CsrMatrix>, a: Var },
    Relu(Var),
    Sigmoid(Var),
    Log(Var),
    Add(Var, Var),
    Hadamard(Var, Var),
    Scale(Var, f64),
    RowScale { a: Var, v: Var },
    Col { a: Var, j: usize },
    ConcatCols(Vec<Var>),
    RowSoftmax { a: Var, t: f64 },
    Dropout { a: Var, mask: Vec<f64> },
    LayerNorm { a: Var, gamma: Var, beta: Var, xhat: Tensor, inv_std: Vec<f64> },
    CrossEntropy { logits: Var, probs: Tensor, targets: Arc<Vec<usize>>, mask: Arc<Vec<usize>> },
}

struct Node {
    op: Op,
    value: Tensor,
    grad: Option<Tensor>,
}

pub struct Tape {
    nodes: Vec<Node>,
    rng: ChaCha8Rng,
    training: bool,
}

impl Tape {
    /// Evaluation-mode tape (dropout is the identity).
    pub fn new(seed: u64) -> Self {
        Tape {
            nodes: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            training: false,
        }
    }

    /// Training-mode tape (dropout active).
    pub fn training(seed: u64) -> Self {
        Tape {
            training: true,
            ..Tape::new(seed)
        }
    }

    pub fn is_training(&self) -> bool {
        self.training
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn grad(&self, v: Var) -> Option<&Tensor> {
        self.nodes[v.0].grad.as_ref()
    }

    /// Scalar value of a 1x1 node.
    pub fn scalar(&self, v: Var) -> f64 {
        self.nodes[v.0].value.get(0, 0)
    }

    fn push(&mut self, op_name: &'static str, op: Op, value: Tensor) -> Result<Var> {
        if !value.is_finite() {
            return Err(Error::NonFinite { op: op_name });
        }
        self.nodes.push(Node {
            op,
            value,
            grad: None,
        });
        Ok(Var(self.nodes.len() - 1))
    }

    /// Insert a constant or parameter tensor.
    pub fn leaf(&mut self, value: Tensor) -> Result<Var> {
        self.push("leaf", Op::Leaf, value)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = matmul(self.value(a), self.value(b))?;
        self.push("matmul", Op::Matmul(a, b), value)
    }

    /// Sparse-dense product with a fixed (non-learnable) operator.
    pub fn spmm(&mut self, m: &Arc<CsrMatrix>, a: Var) -> Result<Var> {
        let value = m.spmm(self.value(a))?;
        self.push("spmm", Op::Spmm { m: Arc::clone(m), a }, value)
    }

    pub fn relu(&mut self, a: Var) -> Result<Var> {
        let value = self.value(a).map(|v| v.max(0.0));
        self.push("relu", Op::Relu(a), value)
    }

    pub fn sigmoid(&mut self, a: Var) -> Result<Var> {
        let value = self.value(a).map(stable_sigmoid);
        self.push("sigmoid", Op::Sigmoid(a), value)
    }

    pub fn log(&mut self, a: Var) -> Result<Var> {
        let value = self.value(a).map(f64::ln);
        self.push("log", Op::Log(a), value)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let (va, vb) = (self.value(a), self.value(b));
        if !va.same_shape(vb) {
            return Err(shape_err("add", va, vb));
        }
        let mut value = va.clone();
        value.add_assign(vb)?;
        self.push("add", Op::Add(a, b), value)
    }

    pub fn hadamard(&mut self, a: Var, b: Var) -> Result<Var> {
        let (va, vb) = (self.value(a), self.value(b));
        if !va.same_shape(vb) {
            return Err(shape_err("hadamard", va, vb));
        }
        let data = va
            .data()
            .iter()
            .zip(vb.data())
            .map(|(x, y)| x * y)
            .collect();
        let value = Tensor::from_vec(va.rows(), va.cols(), data)?;
        self.push("hadamard", Op::Hadamard(a, b), value)
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Result<Var> {
        let value = self.value(a).map(|v| c * v);
        self.push("scale", Op::Scale(a, c), value)
    }

    /// Scale row i of `a` by `v[i]`; `v` must be a column vector.
    pub fn row_scale(&mut self, a: Var, v: Var) -> Result<Var> {
        let (va, vv) = (self.value(a), self.value(v));
        if vv.cols() != 1 || vv.rows() != va.rows() {
            return Err(shape_err("row_scale", va, vv));
        }
        let mut value = va.clone();
        for i in 0..value.rows() {
            let s = vv.get(i, 0);
            for x in value.row_mut(i) {
                *x *= s;
            }
        }
        self.push("row_scale", Op::RowScale { a, v }, value)
    }

    /// Extract column `j` of `a` as an N x 1 tensor.
    pub fn col(&mut self, a: Var, j: usize) -> Result<Var> {
        let va = self.value(a);
        if j >= va.cols() {
            return Err(shape_err("col", va, va));
        }
        let data: Vec<f64> = (0..va.rows()).map(|i| va.get(i, j)).collect();
        let value = Tensor::from_vec(va.rows(), 1, data)?;
        self.push("col", Op::Col { a, j }, value)
    }

    /// Column-concatenate tensors with equal row counts.
    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        if parts.is_empty() {
            return Err(Error::InvalidParameter {
                name: "parts",
                reason: "concat_cols needs at least one input".to_string(),
            });
        }
        let rows = self.value(parts[0]).rows();
        let total: usize = parts.iter().map(|&p| self.value(p).cols()).sum();
        let mut value = Tensor::zeros(rows, total);
        let mut offset = 0;
        for &p in parts {
            let vp = self.value(p);
            if vp.rows() != rows {
                return Err(shape_err("concat_cols", self.value(parts[0]), vp));
            }
            for i in 0..rows {
                value.row_mut(i)[offset..offset + vp.cols()].copy_from_slice(vp.row(i));
            }
            offset += vp.cols();
        }
        self.push("concat_cols", Op::ConcatCols(parts.to_vec()), value)
    }

    /// Row-wise softmax of `a / t`, subtracting the row max first.
    pub fn row_softmax(&mut self, a: Var, t: f64) -> Result<Var> {
        if !(t > 0.0) {
            return Err(Error::InvalidParameter {
                name: "temperature",
                reason: format!("{t} must be positive"),
            });
        }
        let va = self.value(a);
        let mut value = Tensor::zeros(va.rows(), va.cols());
        for i in 0..va.rows() {
            let row = va.row(i);
            let m = row.iter().fold(f64::NEG_INFINITY, |acc, &x| acc.max(x / t));
            let out = value.row_mut(i);
            let mut sum = 0.0;
            for (o, &x) in out.iter_mut().zip(row) {
                *o = (x / t - m).exp();
                sum += *o;
            }
            for o in out.iter_mut() {
                *o /= sum;
            }
        }
        self.push("row_softmax", Op::RowSoftmax { a, t }, value)
    }

    /// Inverted dropout: keeps entries with probability 1-p and scales
    /// survivors by 1/(1-p) so the expectation is unchanged. Identity in
    /// evaluation mode or at p = 0.
    pub fn dropout(&mut self, a: Var, p: f64) -> Result<Var> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::InvalidParameter {
                name: "dropout",
                reason: format!("{p} not in [0, 1)"),
            });
        }
        if !self.training || p == 0.0 {
            return Ok(a);
        }
        let keep = 1.0 - p;
        let inv = 1.0 / keep;
        let va = &self.nodes[a.0].value;
        let mask: Vec<f64> = (0..va.rows() * va.cols())
            .map(|_| if self.rng.gen::<f64>() < keep { inv } else { 0.0 })
            .collect();
        let data = va.data().iter().zip(&mask).map(|(x, m)| x * m).collect();
        let value = Tensor::from_vec(va.rows(), va.cols(), data)?;
        self.push("dropout", Op::Dropout { a, mask }, value)
    }

    /// Row-wise layer normalization with learned affine: each row is mapped
    /// to mean 0 / variance 1 (eps = 1e-5) and scaled by `gamma`, shifted by
    /// `beta` (both 1 x F).
    pub fn layer_norm(&mut self, a: Var, gamma: Var, beta: Var) -> Result<Var> {
        const EPS: f64 = 1e-5;
        let va = self.value(a);
        let (rows, cols) = (va.rows(), va.cols());
        let vg = self.value(gamma);
        let vb = self.value(beta);
        if vg.rows() != 1 || vg.cols() != cols || vb.rows() != 1 || vb.cols() != cols {
            return Err(shape_err("layer_norm", va, vg));
        }
        let mut xhat = Tensor::zeros(rows, cols);
        let mut inv_std = Vec::with_capacity(rows);
        let mut value = Tensor::zeros(rows, cols);
        for i in 0..rows {
            let row = va.row(i);
            let mu = row.iter().sum::<f64>() / cols as f64;
            let var = row.iter().map(|&x| (x - mu) * (x - mu)).sum::<f64>() / cols as f64;
            let is = 1.0 / (var + EPS).sqrt();
            inv_std.push(is);
            for j in 0..cols {
                let xh = (row[j] - mu) * is;
                xhat.set(i, j, xh);
                value.set(i, j, vg.get(0, j) * xh + vb.get(0, j));
            }
        }
        self.push(
            "layer_norm",
            Op::LayerNorm { a, gamma, beta, xhat, inv_std },
            value,
        )
    }

    /// Mean cross-entropy over the masked rows, computed through a stable
    /// log-softmax. Returns a 1x1 scalar node.
    pub fn cross_entropy(
        &mut self,
        logits: Var,
        targets: &Arc<Vec<usize>>,
        mask: &Arc<Vec<usize>>,
    ) -> Result<Var> {
        if mask.is_empty() {
            return Err(Error::EmptyMask);
        }
        let vl = self.value(logits);
        if targets.len() != vl.rows() {
            return Err(Error::ShapeMismatch {
                op: "cross_entropy",
                expected: format!("{} targets", vl.rows()),
                got: format!("{}", targets.len()),
            });
        }
        let mut probs = Tensor::zeros(vl.rows(), vl.cols());
        let mut total = 0.0;
        for &r in mask.iter() {
            let row = vl.row(r);
            let m = row.iter().fold(f64::NEG_INFINITY, |acc, &x| acc.max(x));
            let mut sum = 0.0;
            for &x in row {
                sum += (x - m).exp();
            }
            let lse = m + sum.ln();
            total += lse - row[targets[r]];
            let prow = probs.row_mut(r);
            for (p, &x) in prow.iter_mut().zip(row) {
                *p = (x - lse).exp();
            }
        }
        let value = Tensor::from_vec(1, 1, vec![total / mask.len() as f64])?;
        self.push(
            "cross_entropy",
            Op::CrossEntropy {
                logits,
                probs,
                targets: Arc::clone(targets),
                mask: Arc::clone(mask),
            },
            value,
        )
    }

    /// Reverse-mode accumulation from a scalar root. Visits nodes in reverse
    /// insertion order exactly once.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        {
            let root = &self.nodes[loss.0].value;
            if root.rows() != 1 || root.cols() != 1 {
                return Err(Error::NonScalarRoot);
            }
        }
        for node in &mut self.nodes {
            node.grad = None;
        }
        self.nodes[loss.0].grad = Some(Tensor::from_vec(1, 1, vec![1.0])?);

        for idx in (0..self.nodes.len()).rev() {
            let Some(grad) = self.nodes[idx].grad.take() else {
                continue;
            };
            self.propagate(idx, &grad)?;
            self.nodes[idx].grad = Some(grad);
        }
        Ok(())
    }

    fn add_grad(&mut self, v: Var, delta: Tensor) -> Result<()> {
        match &mut self.nodes[v.0].grad {
            Some(g) => g.add_assign(&delta),
            slot => {
                *slot = Some(delta);
                Ok(())
            }
        }
    }

    fn propagate(&mut self, idx: usize, grad: &Tensor) -> Result<()> {
        // Ops are matched by value where cheap; tensors are borrowed from the
        // arena before mutation to satisfy the borrow checker.
        enum Pending {
            One(Var, Tensor),
            Two(Var, Tensor, Var, Tensor),
            Many(Vec<(Var, Tensor)>),
            None,
        }
        let pending = match &self.nodes[idx].op {
            Op::Leaf => Pending::None,
            Op::Matmul(a, b) => {
                let (a, b) = (*a, *b);
                let ga = matmul_nt(grad, &self.nodes[b.0].value)?;
                let gb = matmul_tn(&self.nodes[a.0].value, grad)?;
                Pending::Two(a, ga, b, gb)
            }
            Op::Spmm { m, a } => {
                let ga = m.spmm_t(grad)?;
                Pending::One(*a, ga)
            }
            Op::Relu(a) => {
                let out = &self.nodes[idx].value;
                let data = grad
                    .data()
                    .iter()
                    .zip(out.data())
                    .map(|(&g, &o)| if o > 0.0 { g } else { 0.0 })
                    .collect();
                Pending::One(*a, Tensor::from_vec(out.rows(), out.cols(), data)?)
            }
            Op::Sigmoid(a) => {
                let out = &self.nodes[idx].value;
                let data = grad
                    .data()
                    .iter()
                    .zip(out.data())
                    .map(|(&g, &s)| g * s * (1.0 - s))
                    .collect();
                Pending::One(*a, Tensor::from_vec(out.rows(), out.cols(), data)?)
            }
            Op::Log(a) => {
                let input = &self.nodes[a.0].value;
                let data = grad
                    .data()
                    .iter()
                    .zip(input.data())
                    .map(|(&g, &x)| g / x)
                    .collect();
                Pending::One(*a, Tensor::from_vec(input.rows(), input.cols(), data)?)
            }
            Op::Add(a, b) => Pending::Two(*a, grad.clone(), *b, grad.clone()),
            Op::Hadamard(a, b) => {
                let (a, b) = (*a, *b);
                let va = &self.nodes[a.0].value;
                let vb = &self.nodes[b.0].value;
                let ga = Tensor::from_vec(
                    va.rows(),
                    va.cols(),
                    grad.data().iter().zip(vb.data()).map(|(g, y)| g * y).collect(),
                )?;
                let gb = Tensor::from_vec(
                    vb.rows(),
                    vb.cols(),
                    grad.data().iter().zip(va.data()).map(|(g, x)| g * x).collect(),
                )?;
                Pending::Two(a, ga, b, gb)
            }
            Op::Scale(a, c) => Pending::One(*a, grad.map(|g| g * c)),
            Op::RowScale { a, v } => {
                let (a, v) = (*a, *v);
                let va = &self.nodes[a.0].value;
                let vv = &self.nodes[v.0].value;
                let mut ga = Tensor::zeros(va.rows(), va.cols());
                let mut gv = Tensor::zeros(va.rows(), 1);
                for i in 0..va.rows() {
                    let s = vv.get(i, 0);
                    let grow = grad.row(i);
                    let arow = va.row(i);
                    let garow = ga.row_mut(i);
                    let mut acc = 0.0;
                    for j in 0..garow.len() {
                        garow[j] = grow[j] * s;
                        acc += grow[j] * arow[j];
                    }
                    gv.set(i, 0, acc);
                }
                Pending::Two(a, ga, v, gv)
            }
            Op::Col { a, j } => {
                let (a, j) = (*a, *j);
                let va = &self.nodes[a.0].value;
                let mut ga = Tensor::zeros(va.rows(), va.cols());
                for i in 0..va.rows() {
                    ga.set(i, j, grad.get(i, 0));
                }
                Pending::One(a, ga)
            }
            Op::ConcatCols(parts) => {
                let parts = parts.clone();
                let mut pieces = Vec::with_capacity(parts.len());
                let mut offset = 0;
                for &p in &parts {
                    let vp = &self.nodes[p.0].value;
                    let mut gp = Tensor::zeros(vp.rows(), vp.cols());
                    for i in 0..vp.rows() {
                        gp.row_mut(i)
                            .copy_from_slice(&grad.row(i)[offset..offset + vp.cols()]);
                    }
                    offset += vp.cols();
                    pieces.push((p, gp));
                }
                Pending::Many(pieces)
            }
            Op::RowSoftmax { a, t } => {
                let (a, t) = (*a, *t);
                let p = &self.nodes[idx].value;
                let mut ga = Tensor::zeros(p.rows(), p.cols());
                for i in 0..p.rows() {
                    let prow = p.row(i);
                    let grow = grad.row(i);
                    let dotv: f64 = prow.iter().zip(grow).map(|(x, y)| x * y).sum();
                    let garow = ga.row_mut(i);
                    for j in 0..garow.len() {
                        garow[j] = prow[j] * (grow[j] - dotv) / t;
                    }
                }
                Pending::One(a, ga)
            }
            Op::Dropout { a, mask } => {
                let data = grad
                    .data()
                    .iter()
                    .zip(mask)
                    .map(|(&g, &m)| g * m)
                    .collect();
                Pending::One(*a, Tensor::from_vec(grad.rows(), grad.cols(), data)?)
            }
            Op::LayerNorm { a, gamma, beta, xhat, inv_std } => {
                let (a, gamma, beta) = (*a, *gamma, *beta);
                let vg = &self.nodes[gamma.0].value;
                let (rows, cols) = (xhat.rows(), xhat.cols());
                let mut ga = Tensor::zeros(rows, cols);
                let mut ggamma = Tensor::zeros(1, cols);
                let mut gbeta = Tensor::zeros(1, cols);
                for i in 0..rows {
                    let grow = grad.row(i);
                    let xrow = xhat.row(i);
                    // dxhat = grad * gamma; two row means feed the input grad.
                    let mut mean_dx = 0.0;
                    let mut mean_dx_x = 0.0;
                    let mut dxhat = vec![0.0; cols];
                    for j in 0..cols {
                        let d = grow[j] * vg.get(0, j);
                        dxhat[j] = d;
                        mean_dx += d;
                        mean_dx_x += d * xrow[j];
                        ggamma.set(0, j, ggamma.get(0, j) + grow[j] * xrow[j]);
                        gbeta.set(0, j, gbeta.get(0, j) + grow[j]);
                    }
                    mean_dx /= cols as f64;
                    mean_dx_x /= cols as f64;
                    let is = inv_std[i];
                    let garow = ga.row_mut(i);
                    for j in 0..cols {
                        garow[j] = is * (dxhat[j] - mean_dx - xrow[j] * mean_dx_x);
                    }
                }
                Pending::Many(vec![(a, ga), (gamma, ggamma), (beta, gbeta)])
            }
            Op::CrossEntropy { logits, probs, targets, mask } => {
                let logits = *logits;
                let scale = grad.get(0, 0) / mask.len() as f64;
                let mut gl = Tensor::zeros(probs.rows(), probs.cols());
                for &r in mask.iter() {
                    let prow = probs.row(r);
                    let grow = gl.row_mut(r);
                    for (j, &p) in prow.iter().enumerate() {
                        let z = if targets[r] == j { 1.0 } else { 0.0 };
                        grow[j] = scale * (p - z);
                    }
                }
                Pending::One(logits, gl)
            }
        };
        match pending {
            Pending::None => {}
            Pending::One(a, ga) => self.add_grad(a, ga)?,
            Pending::Two(a, ga, b, gb) => {
                self.add_grad(a, ga)?;
                self.add_grad(b, gb)?;
            }
            Pending::Many(pieces) => {
                for (v, g) in pieces {
                    self.add_grad(v, g)?;
                }
            }
        }
        Ok(())
    }
}

fn stable_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn shape_err(op: &'static str, a: &Tensor, b: &Tensor) -> Error {
    Error::ShapeMismatch {
        op,
        expected: format!("{}x{}", a.rows(), a.cols()),
        got: format!("{}x{}", b.rows(), b.cols()),
    }
}

/// Result of an autodiff-vs-finite-differences comparison.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub max_rel_err: f64,
    pub coords_checked: usize,
}

/// Compare reverse-mode gradients of a scalar function against central
/// finite differences on up to `coords_per_param` sampled coordinates of
/// each parameter.
///
/// The function is re-evaluated on fresh tapes seeded identically, so any
/// internal randomness (dropout) is held fixed across evaluations.
pub fn grad_check<F>(
    f: F,
    params: &[Tensor],
    step: f64,
    coords_per_param: usize,
    seed: u64,
) -> Result<GradCheckReport>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    grad_check_mode(f, params, step, coords_per_param, seed, false)
}

/// [`grad_check`] with explicit tape mode; training mode keeps dropout
/// active, with masks held fixed by the shared seed.
pub fn grad_check_mode<F>(
    f: F,
    params: &[Tensor],
    step: f64,
    coords_per_param: usize,
    seed: u64,
    training: bool,
) -> Result<GradCheckReport>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    if !(step > 0.0 && step <= 1e-2) {
        return Err(Error::InvalidParameter {
            name: "step",
            reason: format!("{step} not in (0, 1e-2]"),
        });
    }
    let mk_tape = || if training { Tape::training(seed) } else { Tape::new(seed) };
    let eval = |ps: &[Tensor]| -> Result<f64> {
        let mut tape = mk_tape();
        let vars: Vec<Var> = ps
            .iter()
            .map(|p| tape.leaf(p.clone()))
            .collect::<Result<_>>()?;
        let loss = f(&mut tape, &vars)?;
        Ok(tape.scalar(loss))
    };

    // Reverse-mode gradients once.
    let mut tape = mk_tape();
    let vars: Vec<Var> = params
        .iter()
        .map(|p| tape.leaf(p.clone()))
        .collect::<Result<_>>()?;
    let loss = f(&mut tape, &vars)?;
    tape.backward(loss)?;
    let grads: Vec<Tensor> = vars
        .iter()
        .zip(params)
        .map(|(&v, p)| {
            tape.grad(v)
                .cloned()
                .unwrap_or_else(|| Tensor::zeros(p.rows(), p.cols()))
        })
        .collect();

    let mut pick = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut max_rel_err: f64 = 0.0;
    let mut coords_checked = 0;
    for (pi, p) in params.iter().enumerate() {
        let total = p.rows() * p.cols();
        let coords: Vec<usize> = if total <= coords_per_param {
            (0..total).collect()
        } else {
            (0..coords_per_param)
                .map(|_| pick.gen_range(0..total))
                .collect()
        };
        for c in coords {
            let mut plus = params.to_vec();
            plus[pi].data_mut()[c] += step;
            let mut minus = params.to_vec();
            minus[pi].data_mut()[c] -= step;
            let fd = (eval(&plus)? - eval(&minus)?) / (2.0 * step);
            let ad = grads[pi].data()[c];
            let rel = (ad - fd).abs() / ad.abs().max(fd.abs()).max(1e-6);
            max_rel_err = max_rel_err.max(rel);
            coords_checked += 1;
        }
    }
    Ok(GradCheckReport {
        max_rel_err,
        coords_checked,
    })
}
