//! The ordered-neuron recurrent cell.
//!
//! On top of the usual forget/input/output/candidate gates, the cell keeps
//! two *master* gates activated with [`cumax`](crate::numeric::Graph::cumax)
//! (the cumulative sum of a softmax). Because cumax output is monotone
//! along the hidden axis, the master forget gate `mf` is a soft "keep
//! everything above this split point" and the master input gate
//! `mi = 1 - cumax(...)` is a soft "write everything below that one". Their
//! overlap `w = mf * mi` is where the plain gates still arbitrate:
//!
//! ```text
//! f_hat = f * w + (mf - w)        i_hat = i * w + (mi - w)
//! c_t   = f_hat * c_{t-1} + i_hat * cand_t
//! h_t   = o * tanh(c_t)
//! ```
//!
//! High-order neurons (where `mf` is near 1 and `mi` near 0) keep their
//! state across many steps; low-order neurons turn over quickly. The
//! master gates are full `n`-dimensional here (no chunking).

use ndarray::{Array1, Array2, ArrayD, ArrayView1};
use rand::Rng;

use crate::numeric::graph::{cumax_values, sigmoid_scalar};
use crate::numeric::{Graph, NumericError, Parameter, Var};

/// Weights of one gate: input kernel `w` (d x n), recurrent kernel `u`
/// (n x n), bias `b` (n).
#[derive(Debug, Clone)]
pub struct GateParams {
    pub w: Parameter,
    pub u: Parameter,
    pub b: Parameter,
}

/// Gate order used everywhere parameters are enumerated.
pub const GATE_NAMES: [&str; 6] = [
    "forget",
    "input",
    "output",
    "candidate",
    "master_forget",
    "master_input",
];

/// All learnable state of one recurrent cell.
#[derive(Debug, Clone)]
pub struct OnlstmParams {
    pub input_dim: usize,
    pub hidden: usize,
    pub forget: GateParams,
    pub input: GateParams,
    pub output: GateParams,
    pub candidate: GateParams,
    pub master_forget: GateParams,
    pub master_input: GateParams,
}

/// Recurrent state: hidden vector `h` and cell vector `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellState {
    pub h: Array1<f64>,
    pub c: Array1<f64>,
}

impl CellState {
    pub fn zeros(hidden: usize) -> CellState {
        CellState {
            h: Array1::zeros(hidden),
            c: Array1::zeros(hidden),
        }
    }
}

fn gate(name: &str, w: Array2<f64>, u: Array2<f64>, b: Array1<f64>) -> GateParams {
    GateParams {
        w: Parameter::new(format!("{name}.w"), w.into_dyn()),
        u: Parameter::new(format!("{name}.u"), u.into_dyn()),
        b: Parameter::new(format!("{name}.b"), b.into_dyn()),
    }
}

/// A random matrix with orthonormal columns: two rounds of modified
/// Gram-Schmidt over a standard normal sample.
pub fn orthogonal_matrix<R: Rng>(n: usize, rng: &mut R) -> Array2<f64> {
    let mut m = Array2::<f64>::zeros((n, n));
    for value in m.iter_mut() {
        *value = rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng);
    }
    for j in 0..n {
        loop {
            for _ in 0..2 {
                for k in 0..j {
                    let r = m.column(j).dot(&m.column(k));
                    let prev = m.column(k).to_owned();
                    m.column_mut(j).zip_mut_with(&prev, |a, b| *a -= r * b);
                }
            }
            let norm = m.column(j).dot(&m.column(j)).sqrt();
            if norm > 1e-8 {
                m.column_mut(j).mapv_inplace(|v| v / norm);
                break;
            }
            // Degenerate direction: resample this column.
            for value in m.column_mut(j).iter_mut() {
                *value = rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng);
            }
        }
    }
    m
}

fn glorot_uniform<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Array2<f64> {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    let mut m = Array2::<f64>::zeros((rows, cols));
    for value in m.iter_mut() {
        *value = (rng.random::<f64>() * 2.0 - 1.0) * bound;
    }
    m
}

impl OnlstmParams {
    /// Glorot-uniform input kernels, orthogonal recurrent kernels, zero
    /// biases except the forget-gate bias, which starts at 1.
    pub fn init<R: Rng>(input_dim: usize, hidden: usize, rng: &mut R) -> OnlstmParams {
        let mut make = |name: &str, forget_bias: bool| {
            let w = glorot_uniform(input_dim, hidden, rng);
            let u = orthogonal_matrix(hidden, rng);
            let b = if forget_bias {
                Array1::ones(hidden)
            } else {
                Array1::zeros(hidden)
            };
            gate(name, w, u, b)
        };
        OnlstmParams {
            input_dim,
            hidden,
            forget: make("onlstm.forget", true),
            input: make("onlstm.input", false),
            output: make("onlstm.output", false),
            candidate: make("onlstm.candidate", false),
            master_forget: make("onlstm.master_forget", false),
            master_input: make("onlstm.master_input", false),
        }
    }

    /// All-zero parameters; handy for hand-built fixtures.
    pub fn zeros(input_dim: usize, hidden: usize) -> OnlstmParams {
        let make = |name: &str| {
            gate(
                name,
                Array2::zeros((input_dim, hidden)),
                Array2::zeros((hidden, hidden)),
                Array1::zeros(hidden),
            )
        };
        OnlstmParams {
            input_dim,
            hidden,
            forget: make("onlstm.forget"),
            input: make("onlstm.input"),
            output: make("onlstm.output"),
            candidate: make("onlstm.candidate"),
            master_forget: make("onlstm.master_forget"),
            master_input: make("onlstm.master_input"),
        }
    }

    pub fn gates(&self) -> [&GateParams; 6] {
        [
            &self.forget,
            &self.input,
            &self.output,
            &self.candidate,
            &self.master_forget,
            &self.master_input,
        ]
    }

    pub fn gates_mut(&mut self) -> [&mut GateParams; 6] {
        [
            &mut self.forget,
            &mut self.input,
            &mut self.output,
            &mut self.candidate,
            &mut self.master_forget,
            &mut self.master_input,
        ]
    }

    /// Parameters in the canonical order (gate order, then w, u, b).
    pub fn params(&self) -> Vec<&Parameter> {
        self.gates()
            .into_iter()
            .flat_map(|g| [&g.w, &g.u, &g.b])
            .collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Parameter> {
        self.gates_mut()
            .into_iter()
            .flat_map(|g| [&mut g.w, &mut g.u, &mut g.b])
            .collect()
    }

    /// Trainable scalar count: `6 (d n + n^2 + n)`.
    pub fn count_params(&self) -> usize {
        6 * (self.input_dim * self.hidden + self.hidden * self.hidden + self.hidden)
    }

    /// One step of the recurrence for a single example. The training path
    /// uses the graph ops instead; this is the reference entry point.
    pub fn cell_step(&self, x: ArrayView1<f64>, prev: &CellState) -> CellState {
        assert_eq!(x.len(), self.input_dim, "input width");
        assert_eq!(prev.h.len(), self.hidden, "state width");
        let pre = |g: &GateParams| -> Array1<f64> {
            let w = g.w.value.view().into_dimensionality::<ndarray::Ix2>().unwrap();
            let u = g.u.value.view().into_dimensionality::<ndarray::Ix2>().unwrap();
            let b = g.b.value.view().into_dimensionality::<ndarray::Ix1>().unwrap();
            x.dot(&w) + prev.h.dot(&u) + b
        };
        let f = pre(&self.forget).mapv(sigmoid_scalar);
        let i = pre(&self.input).mapv(sigmoid_scalar);
        let o = pre(&self.output).mapv(sigmoid_scalar);
        let cand = pre(&self.candidate).mapv(f64::tanh);
        let mf = cumax1(&pre(&self.master_forget));
        let mi = cumax1(&pre(&self.master_input)).mapv(|v| 1.0 - v);
        let w_t = &mf * &mi;
        let f_hat = &f * &w_t + (&mf - &w_t);
        let i_hat = &i * &w_t + (&mi - &w_t);
        let c = &f_hat * &prev.c + &i_hat * &cand;
        let h = &o * &c.mapv(f64::tanh);
        CellState { h, c }
    }
}

fn cumax1(x: &Array1<f64>) -> Array1<f64> {
    let (out, _) = cumax_values(&x.clone().into_dyn(), 0).expect("1-d cumax");
    out.into_dimensionality::<ndarray::Ix1>().unwrap()
}

/// Tape handles for one registered cell.
#[derive(Debug, Clone)]
pub struct GateVars {
    pub w: Var,
    pub u: Var,
    pub b: Var,
}

#[derive(Debug, Clone)]
pub struct OnlstmVars {
    pub gates: Vec<GateVars>,
    pub hidden: usize,
}

/// Register the cell's tensors as tape leaves, in canonical order.
pub fn register(g: &mut Graph, params: &OnlstmParams) -> Result<OnlstmVars, NumericError> {
    let mut gates = Vec::with_capacity(6);
    for gate in params.gates() {
        gates.push(GateVars {
            w: g.leaf(gate.w.value.clone())?,
            u: g.leaf(gate.u.value.clone())?,
            b: g.leaf(gate.b.value.clone())?,
        });
    }
    Ok(OnlstmVars {
        gates,
        hidden: params.hidden,
    })
}

impl OnlstmVars {
    /// Leaf vars in the same order as [`OnlstmParams::params`].
    pub fn param_vars(&self) -> Vec<Var> {
        self.gates
            .iter()
            .flat_map(|g| [g.w, g.u, g.b])
            .collect()
    }
}

/// One graph cell step over a (batch x d) input var.
pub fn graph_cell_step(
    g: &mut Graph,
    vars: &OnlstmVars,
    x: Var,
    h_prev: Var,
    c_prev: Var,
) -> Result<(Var, Var), NumericError> {
    let pre = |g: &mut Graph, gate: &GateVars| -> Result<Var, NumericError> {
        let xw = g.matmul(x, gate.w)?;
        let hu = g.matmul(h_prev, gate.u)?;
        let s = g.add(xw, hu)?;
        g.add(s, gate.b)
    };
    let [fg, ig, og, cg, mfg, mig] = [
        &vars.gates[0],
        &vars.gates[1],
        &vars.gates[2],
        &vars.gates[3],
        &vars.gates[4],
        &vars.gates[5],
    ];
    let f_pre = pre(g, fg)?;
    let f = g.sigmoid(f_pre);
    let i_pre = pre(g, ig)?;
    let i = g.sigmoid(i_pre);
    let o_pre = pre(g, og)?;
    let o = g.sigmoid(o_pre);
    let c_pre = pre(g, cg)?;
    let cand = g.tanh(c_pre);
    let mf_pre = pre(g, mfg)?;
    let mf = g.cumax(mf_pre, 1)?;
    let mi_pre = pre(g, mig)?;
    let mi_cum = g.cumax(mi_pre, 1)?;
    let mi = g.affine(mi_cum, -1.0, 1.0);
    let w_t = g.mul(mf, mi)?;
    let f_w = g.mul(f, w_t)?;
    let mf_minus_w = g.sub(mf, w_t)?;
    let f_hat = g.add(f_w, mf_minus_w)?;
    let i_w = g.mul(i, w_t)?;
    let mi_minus_w = g.sub(mi, w_t)?;
    let i_hat = g.add(i_w, mi_minus_w)?;
    let keep = g.mul(f_hat, c_prev)?;
    let write = g.mul(i_hat, cand)?;
    let c = g.add(keep, write)?;
    let c_tanh = g.tanh(c);
    let h = g.mul(o, c_tanh)?;
    Ok((h, c))
}

/// Unrolled sequence application on the tape.
#[derive(Debug, Clone)]
pub struct SequenceOutput {
    /// Emitted hidden state per step, zeroed at padded positions.
    pub hidden_steps: Vec<Var>,
    pub final_h: Var,
    pub final_c: Var,
}

/// Run the cell left to right over per-step input vars.
///
/// The initial state is zero. At a padded timestep the state carries
/// through unchanged (so trailing padding never perturbs the valid prefix)
/// and the emitted hidden vector is zero.
pub fn sequence_forward(
    g: &mut Graph,
    vars: &OnlstmVars,
    step_inputs: &[Var],
    valid_len: &[usize],
) -> Result<SequenceOutput, NumericError> {
    if step_inputs.is_empty() {
        return Err(NumericError::EmptySteps);
    }
    let batch = g.value(step_inputs[0]).shape()[0];
    if valid_len.len() != batch {
        return Err(NumericError::ShapeMismatch {
            op: "sequence_forward",
            details: format!("{} lengths for batch {batch}", valid_len.len()),
        });
    }
    let n = vars.hidden;
    let mut h = g.leaf(ArrayD::zeros(ndarray::IxDyn(&[batch, n])))?;
    let mut c = g.leaf(ArrayD::zeros(ndarray::IxDyn(&[batch, n])))?;
    let mut hidden_steps = Vec::with_capacity(step_inputs.len());
    for (t, &x) in step_inputs.iter().enumerate() {
        let (h_new, c_new) = graph_cell_step(g, vars, x, h, c)?;
        let all_valid = valid_len.iter().all(|&len| t < len);
        if all_valid {
            h = h_new;
            c = c_new;
            hidden_steps.push(h);
        } else {
            let mut mask = Array2::<f64>::zeros((batch, n));
            for (b, &len) in valid_len.iter().enumerate() {
                if t < len {
                    mask.row_mut(b).fill(1.0);
                }
            }
            let mask = mask.into_dyn();
            let inv_mask = mask.mapv(|v| 1.0 - v);
            let h_keep = g.mul_const(h_new, &mask)?;
            let h_carry = g.mul_const(h, &inv_mask)?;
            h = g.add(h_keep, h_carry)?;
            let c_keep = g.mul_const(c_new, &mask)?;
            let c_carry = g.mul_const(c, &inv_mask)?;
            c = g.add(c_keep, c_carry)?;
            let emitted = g.mul_const(h, &mask)?;
            hidden_steps.push(emitted);
        }
    }
    Ok(SequenceOutput {
        hidden_steps,
        final_h: h,
        final_c: c,
    })
}
