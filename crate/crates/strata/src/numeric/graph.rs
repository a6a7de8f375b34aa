//! Reverse-mode tape.
//!
//! A [`Graph`] is an append-only list of nodes. Every op validates shapes,
//! computes its value eagerly, and records which parents it needs so that
//! [`Graph::backward`] can walk the tape once in reverse and accumulate
//! gradients. Nodes always appear after their parents, so a single reverse
//! sweep is a valid topological order.

use ndarray::{Array1, Array2, ArrayD, Axis, Ix1, Ix2, IxDyn};
use rand::Rng;

use super::NumericError;

/// Handle to one node in a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

/// Batch statistics produced by a training-mode batch-norm node, used by the
/// caller to update running statistics.
#[derive(Debug, Clone)]
pub struct BatchStats {
    pub mean: Array1<f64>,
    /// Biased (divide by m) variance, the one used for normalization.
    pub var_biased: Array1<f64>,
    pub batch: usize,
}

enum Op {
    Leaf,
    MatMul(Var, Var),
    /// Elementwise add; rhs may be 1-d and broadcast over rows.
    Add(Var, Var),
    Sub(Var, Var),
    /// Elementwise multiply; rhs may be 1-d and broadcast over rows.
    Mul(Var, Var),
    /// scale * x + shift; only the scale matters to the backward pass.
    Affine(Var, f64),
    /// Elementwise multiply by a constant (dropout masks, timestep masks).
    MulConst(Var, ArrayD<f64>),
    Sigmoid(Var),
    Tanh(Var),
    Softmax(Var, usize),
    Cumax {
        x: Var,
        axis: usize,
        softmax: ArrayD<f64>,
    },
    /// Per-feature max over a list of equally shaped (batch x n) steps,
    /// restricted to each example's valid prefix. `argmax` stores the
    /// winning step index per (batch, feature).
    MaxPoolSteps {
        steps: Vec<Var>,
        argmax: Array2<usize>,
    },
    BatchNorm {
        x: Var,
        gamma: Var,
        beta: Var,
        x_hat: Array2<f64>,
        inv_std: Array1<f64>,
        /// Training mode normalizes by batch statistics and needs the full
        /// backward; eval mode treats the statistics as constants.
        training: bool,
    },
    CrossEntropy {
        probs: Var,
        targets: Vec<usize>,
    },
    SumAll(Var),
}

struct Node {
    value: ArrayD<f64>,
    op: Op,
}

/// Gradients from one backward sweep, indexable by [`Var`].
pub struct Grads {
    grads: Vec<Option<ArrayD<f64>>>,
}

impl Grads {
    /// Gradient of the loss with respect to `v`; zeros if `v` did not
    /// influence the loss.
    pub fn get(&self, v: Var, shape: &[usize]) -> ArrayD<f64> {
        match &self.grads[v.0] {
            Some(g) => g.clone(),
            None => ArrayD::zeros(IxDyn(shape)),
        }
    }

    pub fn try_get(&self, v: Var) -> Option<&ArrayD<f64>> {
        self.grads[v.0].as_ref()
    }
}

#[derive(Default)]
pub struct Graph {
    nodes: Vec<Node>,
}

fn shape_err(op: &'static str, details: String) -> NumericError {
    NumericError::ShapeMismatch { op, details }
}

fn as2<'a>(
    v: &'a ArrayD<f64>,
    op: &'static str,
) -> Result<ndarray::ArrayView2<'a, f64>, NumericError> {
    v.view()
        .into_dimensionality::<Ix2>()
        .map_err(|_| shape_err(op, format!("expected 2-d, got {:?}", v.shape())))
}

fn as1<'a>(
    v: &'a ArrayD<f64>,
    op: &'static str,
) -> Result<ndarray::ArrayView1<'a, f64>, NumericError> {
    v.view()
        .into_dimensionality::<Ix1>()
        .map_err(|_| shape_err(op, format!("expected 1-d, got {:?}", v.shape())))
}

/// Numerically stable logistic function.
pub fn sigmoid_scalar(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Softmax along `axis` with per-lane max subtraction.
pub fn softmax_values(x: &ArrayD<f64>, axis: usize) -> Result<ArrayD<f64>, NumericError> {
    if axis >= x.ndim() {
        return Err(NumericError::InvalidAxis {
            axis,
            ndim: x.ndim(),
        });
    }
    let mut out = x.clone();
    for mut lane in out.lanes_mut(Axis(axis)) {
        let max = lane.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in lane.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in lane.iter_mut() {
            *v /= sum;
        }
    }
    Ok(out)
}

/// Cumulative sum of the softmax along `axis`, clamped into (0, 1].
///
/// The clamp only bites where the remaining softmax mass is at floating
/// round-off scale, where the true derivative is zero anyway; backward
/// blocks gradient through clamped entries.
pub fn cumax_values(
    x: &ArrayD<f64>,
    axis: usize,
) -> Result<(ArrayD<f64>, ArrayD<f64>), NumericError> {
    let softmax = softmax_values(x, axis)?;
    let mut out = softmax.clone();
    for mut lane in out.lanes_mut(Axis(axis)) {
        let mut run = 0.0;
        for v in lane.iter_mut() {
            run += *v;
            *v = run.min(1.0);
        }
    }
    Ok((out, softmax))
}

impl Graph {
    pub fn new() -> Self {
        Graph::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &ArrayD<f64> {
        &self.nodes[v.0].value
    }

    /// Value of a 0-d node.
    pub fn scalar(&self, v: Var) -> f64 {
        *self.nodes[v.0]
            .value
            .first()
            .expect("scalar node has one element")
    }

    fn push(&mut self, value: ArrayD<f64>, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    /// Insert a leaf holding `value`. Rejects non-finite input so NaN/Inf
    /// cannot enter the tape silently.
    pub fn leaf(&mut self, value: ArrayD<f64>) -> Result<Var, NumericError> {
        if !value.iter().all(|v| v.is_finite()) {
            return Err(NumericError::NonFinite { op: "leaf" });
        }
        Ok(self.push(value, Op::Leaf))
    }

    pub fn leaf2(&mut self, value: Array2<f64>) -> Result<Var, NumericError> {
        self.leaf(value.into_dyn())
    }

    pub fn leaf1(&mut self, value: Array1<f64>) -> Result<Var, NumericError> {
        self.leaf(value.into_dyn())
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, NumericError> {
        let av = as2(self.value(a), "matmul")?;
        let bv = as2(self.value(b), "matmul")?;
        if av.ncols() != bv.nrows() {
            return Err(shape_err(
                "matmul",
                format!("{:?} x {:?}", av.shape(), bv.shape()),
            ));
        }
        let out = av.dot(&bv).into_dyn();
        Ok(self.push(out, Op::MatMul(a, b)))
    }

    fn broadcast_pair(&self, op: &'static str, a: Var, b: Var) -> Result<(), NumericError> {
        let av = self.value(a);
        let bv = self.value(b);
        if av.shape() == bv.shape()
            || (av.ndim() == 2 && bv.ndim() == 1 && av.shape()[1] == bv.shape()[0])
        {
            return Ok(());
        }
        Err(shape_err(op, format!("{:?} vs {:?}", av.shape(), bv.shape())))
    }

    /// Elementwise addition. `b` may be a 1-d row broadcast over the rows of
    /// a 2-d `a` (bias addition over the batch axis).
    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, NumericError> {
        self.broadcast_pair("add", a, b)?;
        let out = self.value(a) + self.value(b);
        Ok(self.push(out, Op::Add(a, b)))
    }

    /// Elementwise subtraction of same-shape tensors.
    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var, NumericError> {
        if self.value(a).shape() != self.value(b).shape() {
            return Err(shape_err(
                "sub",
                format!("{:?} vs {:?}", self.value(a).shape(), self.value(b).shape()),
            ));
        }
        let out = self.value(a) - self.value(b);
        Ok(self.push(out, Op::Sub(a, b)))
    }

    /// Elementwise product. `b` may be a 1-d row broadcast over the rows of
    /// a 2-d `a`.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, NumericError> {
        self.broadcast_pair("mul", a, b)?;
        let out = self.value(a) * self.value(b);
        Ok(self.push(out, Op::Mul(a, b)))
    }

    /// `scale * x + shift`, elementwise.
    pub fn affine(&mut self, x: Var, scale: f64, shift: f64) -> Var {
        let out = self.value(x).mapv(|v| scale * v + shift);
        self.push(out, Op::Affine(x, scale))
    }

    /// Elementwise product with a constant tensor (the constant gets no
    /// gradient): dropout masks, timestep masks.
    pub fn mul_const(&mut self, x: Var, mask: &ArrayD<f64>) -> Result<Var, NumericError> {
        if self.value(x).shape() != mask.shape() {
            return Err(shape_err(
                "mul_const",
                format!("{:?} vs {:?}", self.value(x).shape(), mask.shape()),
            ));
        }
        let out = self.value(x) * mask;
        Ok(self.push(out, Op::MulConst(x, mask.clone())))
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        let out = self.value(x).mapv(sigmoid_scalar);
        self.push(out, Op::Sigmoid(x))
    }

    pub fn tanh(&mut self, x: Var) -> Var {
        let out = self.value(x).mapv(f64::tanh);
        self.push(out, Op::Tanh(x))
    }

    pub fn softmax(&mut self, x: Var, axis: usize) -> Result<Var, NumericError> {
        let out = softmax_values(self.value(x), axis)?;
        Ok(self.push(out, Op::Softmax(x, axis)))
    }

    /// Cumulative sum of the softmax: monotone nondecreasing along `axis`,
    /// values in (0, 1], final element 1.
    pub fn cumax(&mut self, x: Var, axis: usize) -> Result<Var, NumericError> {
        let (out, softmax) = cumax_values(self.value(x), axis)?;
        Ok(self.push(out, Op::Cumax { x, axis, softmax }))
    }

    /// Masked global max pool over timesteps.
    ///
    /// `steps[t]` is the (batch x n) hidden state at time `t`; example `b`
    /// pools over `t < valid_len[b]` only. Ties go to the lowest time index.
    pub fn max_pool_steps(
        &mut self,
        steps: &[Var],
        valid_len: &[usize],
    ) -> Result<Var, NumericError> {
        if steps.is_empty() {
            return Err(NumericError::EmptySteps);
        }
        let first = as2(self.value(steps[0]), "max_pool")?;
        let (batch, hidden) = (first.nrows(), first.ncols());
        for &s in steps {
            let sv = as2(self.value(s), "max_pool")?;
            if sv.shape() != [batch, hidden] {
                return Err(shape_err("max_pool", "ragged step shapes".into()));
            }
        }
        if valid_len.len() != batch {
            return Err(shape_err(
                "max_pool",
                format!("{} lengths for batch {batch}", valid_len.len()),
            ));
        }
        let mut out = Array2::<f64>::zeros((batch, hidden));
        let mut argmax = Array2::<usize>::zeros((batch, hidden));
        for (b, &len) in valid_len.iter().enumerate() {
            if len == 0 {
                return Err(NumericError::AllMasked { row: b });
            }
            if len > steps.len() {
                return Err(shape_err(
                    "max_pool",
                    format!("valid length {len} exceeds {} steps", steps.len()),
                ));
            }
            for f in 0..hidden {
                let mut best = f64::NEG_INFINITY;
                let mut best_t = 0;
                for (t, &s) in steps.iter().enumerate().take(len) {
                    let v = self.value(s)[[b, f]];
                    if v > best {
                        best = v;
                        best_t = t;
                    }
                }
                out[[b, f]] = best;
                argmax[[b, f]] = best_t;
            }
        }
        Ok(self.push(
            out.into_dyn(),
            Op::MaxPoolSteps {
                steps: steps.to_vec(),
                argmax,
            },
        ))
    }

    /// Batch normalization over the batch axis of a (batch x features) input.
    ///
    /// Training mode normalizes with batch statistics and returns them so
    /// the caller can maintain running statistics; eval mode normalizes with
    /// the provided running statistics held constant.
    pub fn batch_norm(
        &mut self,
        x: Var,
        gamma: Var,
        beta: Var,
        running: Option<(&Array1<f64>, &Array1<f64>)>,
        eps: f64,
    ) -> Result<(Var, Option<BatchStats>), NumericError> {
        let xv = as2(self.value(x), "batch_norm")?.to_owned();
        let g = as1(self.value(gamma), "batch_norm")?.to_owned();
        let b = as1(self.value(beta), "batch_norm")?.to_owned();
        let (m, f) = (xv.nrows(), xv.ncols());
        if g.len() != f || b.len() != f {
            return Err(shape_err(
                "batch_norm",
                format!("{f} features, gamma {} beta {}", g.len(), b.len()),
            ));
        }
        let (mean, var, training, stats) = match running {
            None => {
                if m < 2 {
                    return Err(NumericError::DegenerateBatch {
                        op: "batch_norm",
                        batch: m,
                    });
                }
                let mean = xv.mean_axis(Axis(0)).expect("non-empty batch");
                let var = xv
                    .outer_iter()
                    .fold(Array1::<f64>::zeros(f), |acc, row| {
                        acc + (&row - &mean).mapv(|d| d * d)
                    })
                    / m as f64;
                let stats = BatchStats {
                    mean: mean.clone(),
                    var_biased: var.clone(),
                    batch: m,
                };
                (mean, var, true, Some(stats))
            }
            Some((mean, var)) => {
                if mean.len() != f || var.len() != f {
                    return Err(shape_err(
                        "batch_norm",
                        format!("running stats length vs {f} features"),
                    ));
                }
                (mean.clone(), var.clone(), false, None)
            }
        };
        let inv_std = var.mapv(|v| 1.0 / (v + eps).sqrt());
        let x_hat = (&xv - &mean) * &inv_std;
        let out = (&x_hat * &g + &b).into_dyn();
        let var_out = self.push(
            out,
            Op::BatchNorm {
                x,
                gamma,
                beta,
                x_hat,
                inv_std,
                training,
            },
        );
        Ok((var_out, stats))
    }

    /// Summed cross-entropy of probability rows against true class indices,
    /// with a 1e-12 probability floor inside the log.
    pub fn cross_entropy(&mut self, probs: Var, targets: &[usize]) -> Result<Var, NumericError> {
        const FLOOR: f64 = 1e-12;
        let pv = as2(self.value(probs), "cross_entropy")?;
        if pv.nrows() != targets.len() {
            return Err(shape_err(
                "cross_entropy",
                format!("{} rows, {} targets", pv.nrows(), targets.len()),
            ));
        }
        let classes = pv.ncols();
        let mut loss = 0.0;
        for (r, (row, &t)) in pv.outer_iter().zip(targets).enumerate() {
            if t >= classes {
                return Err(NumericError::InvalidClassIndex { index: t, classes });
            }
            let sum: f64 = row.sum();
            if (sum - 1.0).abs() > 1e-6 {
                return Err(NumericError::NotNormalized { row: r, sum });
            }
            loss -= row[t].max(FLOOR).ln();
        }
        let value = ArrayD::from_elem(IxDyn(&[]), loss);
        Ok(self.push(
            value,
            Op::CrossEntropy {
                probs,
                targets: targets.to_vec(),
            },
        ))
    }

    /// Sum of all elements, as a 0-d node.
    pub fn sum_all(&mut self, x: Var) -> Var {
        let s = self.value(x).sum();
        self.push(ArrayD::from_elem(IxDyn(&[]), s), Op::SumAll(x))
    }

    /// `x @ w + b` with `b` broadcast over rows.
    pub fn linear(&mut self, x: Var, w: Var, b: Var) -> Result<Var, NumericError> {
        let xw = self.matmul(x, w)?;
        self.add(xw, b)
    }

    /// Reverse sweep from a 0-d `loss` node, accumulating gradients for
    /// every node that influenced it.
    pub fn backward(&self, loss: Var) -> Result<Grads, NumericError> {
        let loss_value = &self.nodes[loss.0].value;
        if loss_value.len() != 1 {
            return Err(shape_err(
                "backward",
                format!("loss must be scalar, got {:?}", loss_value.shape()),
            ));
        }
        if !loss_value.first().unwrap().is_finite() {
            return Err(NumericError::NonFinite { op: "backward" });
        }
        let mut grads: Vec<Option<ArrayD<f64>>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(ArrayD::ones(loss_value.raw_dim()));

        fn acc(slot: &mut Option<ArrayD<f64>>, delta: ArrayD<f64>) {
            match slot {
                Some(g) => *g += &delta,
                None => *slot = Some(delta),
            }
        }

        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].clone() else { continue };
            match &self.nodes[i].op {
                Op::Leaf => {}
                Op::MatMul(a, b) => {
                    let gv = as2(&g, "matmul")?;
                    let av = as2(self.value(*a), "matmul")?;
                    let bv = as2(self.value(*b), "matmul")?;
                    acc(&mut grads[a.0], gv.dot(&bv.t()).into_dyn());
                    acc(&mut grads[b.0], av.t().dot(&gv).into_dyn());
                }
                Op::Add(a, b) => {
                    acc(&mut grads[a.0], g.clone());
                    if self.value(*b).shape() == g.shape() {
                        acc(&mut grads[b.0], g);
                    } else {
                        let g2 = as2(&g, "add")?;
                        acc(&mut grads[b.0], g2.sum_axis(Axis(0)).into_dyn());
                    }
                }
                Op::Sub(a, b) => {
                    acc(&mut grads[a.0], g.clone());
                    acc(&mut grads[b.0], g.mapv(|v| -v));
                }
                Op::Mul(a, b) => {
                    let av = self.value(*a);
                    let bv = self.value(*b);
                    if av.shape() == bv.shape() {
                        acc(&mut grads[a.0], &g * bv);
                        acc(&mut grads[b.0], &g * av);
                    } else {
                        // b is a broadcast 1-d row.
                        acc(&mut grads[a.0], &g * bv);
                        let prod = &g * av;
                        let p2 = as2(&prod, "mul")?;
                        acc(&mut grads[b.0], p2.sum_axis(Axis(0)).into_dyn());
                    }
                }
                Op::Affine(x, scale) => {
                    acc(&mut grads[x.0], g.mapv(|v| v * scale));
                }
                Op::MulConst(x, mask) => {
                    acc(&mut grads[x.0], &g * mask);
                }
                Op::Sigmoid(x) => {
                    let y = &self.nodes[i].value;
                    acc(&mut grads[x.0], &g * &(y * &y.mapv(|v| 1.0 - v)));
                }
                Op::Tanh(x) => {
                    let y = &self.nodes[i].value;
                    acc(&mut grads[x.0], &g * &y.mapv(|v| 1.0 - v * v));
                }
                Op::Softmax(x, axis) => {
                    let y = &self.nodes[i].value;
                    let mut dx = ArrayD::zeros(y.raw_dim());
                    let ax = Axis(*axis);
                    for ((y_lane, g_lane), mut dx_lane) in y
                        .lanes(ax)
                        .into_iter()
                        .zip(g.lanes(ax))
                        .zip(dx.lanes_mut(ax))
                    {
                        let dot: f64 = y_lane.iter().zip(g_lane.iter()).map(|(a, b)| a * b).sum();
                        for ((d, &yv), &gv) in
                            dx_lane.iter_mut().zip(y_lane.iter()).zip(g_lane.iter())
                        {
                            *d = yv * (gv - dot);
                        }
                    }
                    acc(&mut grads[x.0], dx);
                }
                Op::Cumax { x, axis, softmax } => {
                    // y = clamp(cumsum(s)); dL/ds_j = sum_{k >= j, unclamped} g_k,
                    // then the softmax Jacobian.
                    let y = &self.nodes[i].value;
                    let ax = Axis(*axis);
                    let mut dx = ArrayD::zeros(y.raw_dim());
                    for (((y_lane, g_lane), s_lane), mut dx_lane) in y
                        .lanes(ax)
                        .into_iter()
                        .zip(g.lanes(ax))
                        .zip(softmax.lanes(ax))
                        .zip(dx.lanes_mut(ax))
                    {
                        let n = y_lane.len();
                        let mut gs = vec![0.0; n];
                        let mut run = 0.0;
                        for j in (0..n).rev() {
                            if y_lane[j] < 1.0 {
                                run += g_lane[j];
                            }
                            gs[j] = run;
                        }
                        let dot: f64 = gs.iter().zip(s_lane.iter()).map(|(a, b)| a * b).sum();
                        for ((d, &sv), &gsv) in dx_lane.iter_mut().zip(s_lane.iter()).zip(&gs) {
                            *d = sv * (gsv - dot);
                        }
                    }
                    acc(&mut grads[x.0], dx);
                }
                Op::MaxPoolSteps { steps, argmax } => {
                    let g2 = as2(&g, "max_pool")?;
                    let (batch, hidden) = (argmax.nrows(), argmax.ncols());
                    let mut per_step =
                        vec![Array2::<f64>::zeros((batch, hidden)); steps.len()];
                    for b in 0..batch {
                        for f in 0..hidden {
                            per_step[argmax[[b, f]]][[b, f]] += g2[[b, f]];
                        }
                    }
                    for (s, d) in steps.iter().zip(per_step) {
                        acc(&mut grads[s.0], d.into_dyn());
                    }
                }
                Op::BatchNorm {
                    x,
                    gamma,
                    beta,
                    x_hat,
                    inv_std,
                    training,
                } => {
                    let g2 = as2(&g, "batch_norm")?.to_owned();
                    let gamma_v = as1(self.value(*gamma), "batch_norm")?.to_owned();
                    let m = g2.nrows() as f64;
                    acc(&mut grads[beta.0], g2.sum_axis(Axis(0)).into_dyn());
                    acc(
                        &mut grads[gamma.0],
                        (&g2 * x_hat).sum_axis(Axis(0)).into_dyn(),
                    );
                    if *training {
                        let d_xhat = &g2 * &gamma_v;
                        let sum_dxhat = d_xhat.sum_axis(Axis(0));
                        let sum_dxhat_xhat = (&d_xhat * x_hat).sum_axis(Axis(0));
                        let dx = (&(d_xhat.mapv(|v| v * m) - &sum_dxhat)
                            - &(x_hat * &sum_dxhat_xhat))
                            * &inv_std.mapv(|v| v / m);
                        acc(&mut grads[x.0], dx.into_dyn());
                    } else {
                        let scale = &gamma_v * inv_std;
                        acc(&mut grads[x.0], (&g2 * &scale).into_dyn());
                    }
                }
                Op::CrossEntropy { probs, targets } => {
                    const FLOOR: f64 = 1e-12;
                    let gs = *g.first().unwrap();
                    let pv = as2(self.value(*probs), "cross_entropy")?;
                    let mut dp = Array2::<f64>::zeros((pv.nrows(), pv.ncols()));
                    for (r, &t) in targets.iter().enumerate() {
                        let p = pv[[r, t]];
                        if p > FLOOR {
                            dp[[r, t]] = -gs / p;
                        }
                    }
                    acc(&mut grads[probs.0], dp.into_dyn());
                }
                Op::SumAll(x) => {
                    let gs = *g.first().unwrap();
                    let shape = self.value(*x).raw_dim();
                    acc(&mut grads[x.0], ArrayD::from_elem(shape, gs));
                }
            }
        }
        Ok(Grads { grads })
    }
}

/// Inverted-dropout mask: entries are 0 with probability `rate`, otherwise
/// `1 / (1 - rate)`, drawn in row-major order.
pub fn dropout_mask<R: Rng>(
    shape: &[usize],
    rate: f64,
    rng: &mut R,
) -> Result<ArrayD<f64>, NumericError> {
    if !(0.0..1.0).contains(&rate) {
        return Err(NumericError::InvalidRate(rate));
    }
    let n: usize = shape.iter().product();
    let keep = 1.0 / (1.0 - rate);
    let values: Vec<f64> = (0..n)
        .map(|_| {
            if rng.random::<f64>() < rate {
                0.0
            } else {
                keep
            }
        })
        .collect();
    Ok(ArrayD::from_shape_vec(IxDyn(shape), values).expect("shape matches length"))
}

/// Inverted dropout: identity in evaluation mode or at rate 0.
pub fn dropout<R: Rng>(
    x: &ArrayD<f64>,
    rate: f64,
    training: bool,
    rng: &mut R,
) -> Result<ArrayD<f64>, NumericError> {
    if !(0.0..1.0).contains(&rate) {
        return Err(NumericError::InvalidRate(rate));
    }
    if !training || rate == 0.0 {
        return Ok(x.clone());
    }
    let mask = dropout_mask(x.shape(), rate, rng)?;
    Ok(x * &mask)
}
