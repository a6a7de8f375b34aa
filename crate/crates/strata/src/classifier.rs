//! One complete per-level model.
//!
//! Pipeline: embedding lookup (frozen) -> input dropout -> recurrent cell
//! over the sequence -> masked global max pool -> batch norm -> tanh hidden
//! layer -> dropout -> linear -> softmax. The pooled vector is what the
//! two-layer head classifies; the embedding matrix never receives
//! gradients.

use ndarray::{Array1, Array2};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corpus::{EmbeddingMatrix, LevelBatch};
use crate::numeric::graph::BatchStats;
use crate::numeric::{dropout_mask, Graph, NumericError, Parameter, Var};
use crate::onlstm::{self, OnlstmParams};
use crate::taxonomy::NodeId;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error("batch carries no true class indices")]
    MissingTargets,
}

/// Batch-norm affine parameters plus running statistics for evaluation.
#[derive(Debug, Clone)]
pub struct BatchNormParams {
    pub gamma: Parameter,
    pub beta: Parameter,
    pub running_mean: Array1<f64>,
    pub running_var: Array1<f64>,
    pub momentum: f64,
    pub eps: f64,
}

impl BatchNormParams {
    pub fn new(features: usize) -> BatchNormParams {
        BatchNormParams {
            gamma: Parameter::new("bn.gamma", Array1::ones(features).into_dyn()),
            beta: Parameter::new("bn.beta", Array1::zeros(features).into_dyn()),
            running_mean: Array1::zeros(features),
            running_var: Array1::ones(features),
            momentum: 0.1,
            eps: 1e-5,
        }
    }

    fn absorb(&mut self, stats: &BatchStats) {
        let m = stats.batch as f64;
        // Running variance keeps the unbiased estimate, normalization the
        // biased one.
        let unbiased = stats.var_biased.mapv(|v| v * m / (m - 1.0));
        self.running_mean = &self.running_mean * (1.0 - self.momentum)
            + &stats.mean.mapv(|v| v * self.momentum);
        self.running_var =
            &self.running_var * (1.0 - self.momentum) + &unbiased.mapv(|v| v * self.momentum);
    }
}

/// The two-layer head: tanh hidden layer, then a linear class layer.
#[derive(Debug, Clone)]
pub struct MlpParams {
    pub w1: Parameter,
    pub b1: Parameter,
    pub w2: Parameter,
    pub b2: Parameter,
}

/// Everything trainable for one hierarchy level, plus the class-index map
/// that fixes which output column is which category.
#[derive(Debug, Clone)]
pub struct LevelClassifier {
    pub level: usize,
    pub onlstm: OnlstmParams,
    pub bn: BatchNormParams,
    pub mlp: MlpParams,
    pub input_dropout: f64,
    pub hidden_dropout: f64,
    pub class_ids: Vec<NodeId>,
}

/// Probabilities and pooled features from one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardResult {
    /// (batch x num_classes), rows sum to 1.
    pub probs: Array2<f64>,
    /// (batch x hidden) masked max-pooled features.
    pub pooled: Array2<f64>,
}

/// Per-layer trainable parameter counts.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct ParamCount {
    pub onlstm: usize,
    pub batch_norm: usize,
    pub mlp: usize,
    pub total: usize,
}

struct Pass {
    graph: Graph,
    probs: Var,
    pooled: Var,
    param_vars: Vec<Var>,
    stats: Option<BatchStats>,
}

fn glorot2<R: rand::Rng>(rows: usize, cols: usize, rng: &mut R) -> Array2<f64> {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    let mut m = Array2::<f64>::zeros((rows, cols));
    for v in m.iter_mut() {
        *v = (rng.random::<f64>() * 2.0 - 1.0) * bound;
    }
    m
}

impl LevelClassifier {
    /// Fresh classifier: Glorot MLP weights, zero biases, unit batch-norm.
    /// The recurrent cell is initialized here unless `init_onlstm` provides
    /// transferred weights, which are copied exactly.
    #[allow(clippy::too_many_arguments)]
    pub fn init(
        level: usize,
        embed_dim: usize,
        hidden: usize,
        mlp_hidden: usize,
        class_ids: Vec<NodeId>,
        input_dropout: f64,
        hidden_dropout: f64,
        init_onlstm: Option<OnlstmParams>,
        rng: &mut ChaCha8Rng,
    ) -> LevelClassifier {
        let onlstm = match init_onlstm {
            Some(params) => {
                assert_eq!(params.input_dim, embed_dim, "transferred input width");
                assert_eq!(params.hidden, hidden, "transferred hidden width");
                params
            }
            None => OnlstmParams::init(embed_dim, hidden, rng),
        };
        let classes = class_ids.len();
        let mlp = MlpParams {
            w1: Parameter::new("mlp.w1", glorot2(hidden, mlp_hidden, rng).into_dyn()),
            b1: Parameter::new("mlp.b1", Array1::zeros(mlp_hidden).into_dyn()),
            w2: Parameter::new("mlp.w2", glorot2(mlp_hidden, classes, rng).into_dyn()),
            b2: Parameter::new("mlp.b2", Array1::zeros(classes).into_dyn()),
        };
        LevelClassifier {
            level,
            onlstm,
            bn: BatchNormParams::new(hidden),
            mlp,
            input_dropout,
            hidden_dropout,
            class_ids,
        }
    }

    pub fn num_classes(&self) -> usize {
        self.class_ids.len()
    }

    pub fn hidden(&self) -> usize {
        self.onlstm.hidden
    }

    pub fn mlp_hidden(&self) -> usize {
        self.mlp.b1.value.len()
    }

    /// Trainable parameters in canonical order: the six gates (w, u, b
    /// each), then batch-norm gamma/beta, then the head.
    pub fn params(&self) -> Vec<&Parameter> {
        let mut out = self.onlstm.params();
        out.push(&self.bn.gamma);
        out.push(&self.bn.beta);
        out.push(&self.mlp.w1);
        out.push(&self.mlp.b1);
        out.push(&self.mlp.w2);
        out.push(&self.mlp.b2);
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut Parameter> {
        let mut out = self.onlstm.params_mut();
        out.push(&mut self.bn.gamma);
        out.push(&mut self.bn.beta);
        out.push(&mut self.mlp.w1);
        out.push(&mut self.mlp.b1);
        out.push(&mut self.mlp.w2);
        out.push(&mut self.mlp.b2);
        out
    }

    /// Trainable scalar counts; the frozen embedding is excluded.
    pub fn count_params(&self) -> ParamCount {
        let n = self.hidden();
        let u = self.mlp_hidden();
        let k = self.num_classes();
        let onlstm = self.onlstm.count_params();
        let batch_norm = 2 * n;
        let mlp = n * u + u + u * k + k;
        ParamCount {
            onlstm,
            batch_norm,
            mlp,
            total: onlstm + batch_norm + mlp,
        }
    }

    fn build_pass(
        &self,
        emb: &EmbeddingMatrix,
        batch: &LevelBatch,
        training: bool,
        mut rng: Option<&mut ChaCha8Rng>,
    ) -> Result<Pass, ClassifierError> {
        let mut graph = Graph::new();
        let vars = onlstm::register(&mut graph, &self.onlstm)?;
        let batch_size = batch.batch_size();
        let width = batch.width();
        let d = emb.dim();

        // Frozen embedding rows enter the tape as constants; input dropout
        // is applied directly to those constants.
        let mut step_inputs = Vec::with_capacity(width);
        for t in 0..width {
            let mut x_t = Array2::<f64>::zeros((batch_size, d));
            for b in 0..batch_size {
                x_t.row_mut(b).assign(&emb.row(batch.token_ids[[b, t]]));
            }
            let mut x_t = x_t.into_dyn();
            if training && self.input_dropout > 0.0 {
                let rng = rng
                    .as_deref_mut()
                    .expect("training forward needs a dropout stream");
                let mask = dropout_mask(&[batch_size, d], self.input_dropout, rng)?;
                x_t *= &mask;
            }
            step_inputs.push(graph.leaf(x_t)?);
        }

        let seq = onlstm::sequence_forward(&mut graph, &vars, &step_inputs, &batch.lengths)?;
        let pooled = graph.max_pool_steps(&seq.hidden_steps, &batch.lengths)?;

        let gamma = graph.leaf(self.bn.gamma.value.clone())?;
        let beta = graph.leaf(self.bn.beta.value.clone())?;
        let running = (&self.bn.running_mean, &self.bn.running_var);
        let (normed, stats) = if training {
            graph.batch_norm(pooled, gamma, beta, None, self.bn.eps)?
        } else {
            graph.batch_norm(pooled, gamma, beta, Some(running), self.bn.eps)?
        };

        let w1 = graph.leaf(self.mlp.w1.value.clone())?;
        let b1 = graph.leaf(self.mlp.b1.value.clone())?;
        let pre_hidden = graph.linear(normed, w1, b1)?;
        let mut hidden = graph.tanh(pre_hidden);
        if training && self.hidden_dropout > 0.0 {
            let rng = rng
                .as_deref_mut()
                .expect("training forward needs a dropout stream");
            let mask =
                dropout_mask(&[batch_size, self.mlp_hidden()], self.hidden_dropout, rng)?;
            hidden = graph.mul_const(hidden, &mask)?;
        }
        let w2 = graph.leaf(self.mlp.w2.value.clone())?;
        let b2 = graph.leaf(self.mlp.b2.value.clone())?;
        let logits = graph.linear(hidden, w2, b2)?;
        let probs = graph.softmax(logits, 1)?;

        let mut param_vars = vars.param_vars();
        param_vars.extend([gamma, beta, w1, b1, w2, b2]);
        Ok(Pass {
            graph,
            probs,
            pooled,
            param_vars,
            stats,
        })
    }

    fn result_of(pass: &Pass) -> ForwardResult {
        let probs = pass
            .graph
            .value(pass.probs)
            .view()
            .into_dimensionality::<ndarray::Ix2>()
            .expect("softmax output is 2-d")
            .to_owned();
        let pooled = pass
            .graph
            .value(pass.pooled)
            .view()
            .into_dimensionality::<ndarray::Ix2>()
            .expect("pooled output is 2-d")
            .to_owned();
        ForwardResult { probs, pooled }
    }

    /// Run the pipeline. Training mode applies dropout, normalizes by batch
    /// statistics, and updates the running statistics; evaluation mode is a
    /// pure function of the inputs.
    pub fn forward(
        &mut self,
        emb: &EmbeddingMatrix,
        batch: &LevelBatch,
        training: bool,
        rng: &mut ChaCha8Rng,
    ) -> Result<ForwardResult, ClassifierError> {
        let pass = self.build_pass(emb, batch, training, Some(rng))?;
        if let Some(stats) = &pass.stats {
            self.bn.absorb(stats);
        }
        Ok(Self::result_of(&pass))
    }

    /// Evaluation-mode forward without any state mutation.
    pub fn forward_eval(
        &self,
        emb: &EmbeddingMatrix,
        batch: &LevelBatch,
    ) -> Result<ForwardResult, ClassifierError> {
        let pass = self.build_pass(emb, batch, false, None)?;
        Ok(Self::result_of(&pass))
    }

    /// Training-mode forward and backward: summed cross-entropy over the
    /// batch, gradients written to every trainable parameter (the frozen
    /// embedding has none), running statistics updated.
    pub fn loss_and_grads(
        &mut self,
        emb: &EmbeddingMatrix,
        batch: &LevelBatch,
        rng: &mut ChaCha8Rng,
    ) -> Result<f64, ClassifierError> {
        let targets = batch
            .targets
            .as_ref()
            .ok_or(ClassifierError::MissingTargets)?;
        let mut pass = self.build_pass(emb, batch, true, Some(rng))?;
        let loss = pass.graph.cross_entropy(pass.probs, targets)?;
        let grads = pass.graph.backward(loss)?;
        let param_vars = pass.param_vars.clone();
        for (param, var) in self.params_mut().into_iter().zip(param_vars) {
            param.grad = grads.get(var, param.value.shape());
        }
        if let Some(stats) = &pass.stats {
            self.bn.absorb(stats);
        }
        Ok(pass.graph.scalar(loss))
    }

    /// Evaluation-mode argmax per example, ties broken toward the lowest
    /// class index, plus the full probability rows.
    pub fn predict(
        &self,
        emb: &EmbeddingMatrix,
        batch: &LevelBatch,
    ) -> Result<(Vec<usize>, Array2<f64>), ClassifierError> {
        let result = self.forward_eval(emb, batch)?;
        let indices = result
            .probs
            .outer_iter()
            .map(|row| {
                let mut best = 0;
                for (i, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = i;
                    }
                }
                best
            })
            .collect();
        Ok((indices, result.probs))
    }
}
