//! Trainable parameters and the Adam optimizer.

use ndarray::ArrayD;

use super::NumericError;

/// A named trainable tensor paired with its gradient accumulator.
#[derive(Debug, Clone)]
pub struct Parameter {
    pub name: String,
    pub value: ArrayD<f64>,
    pub grad: ArrayD<f64>,
}

impl Parameter {
    pub fn new(name: impl Into<String>, value: ArrayD<f64>) -> Self {
        let grad = ArrayD::zeros(value.raw_dim());
        Parameter {
            name: name.into(),
            value,
            grad,
        }
    }

    pub fn len(&self) -> usize {
        self.value.len()
    }

    pub fn is_empty(&self) -> bool {
        self.value.is_empty()
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(0.0);
    }
}

/// Per-parameter first and second moment estimates plus the step counter.
///
/// Moments are kept flat and aligned by parameter order, so the same state
/// can serve any parameter list with matching shapes.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub t: u64,
    m: Vec<ArrayD<f64>>,
    v: Vec<ArrayD<f64>>,
}

impl AdamState {
    /// Fresh state with the standard coefficients (0.9, 0.999, 1e-8).
    pub fn new(params: &[&Parameter]) -> Self {
        AdamState {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: params
                .iter()
                .map(|p| ArrayD::zeros(p.value.raw_dim()))
                .collect(),
            v: params
                .iter()
                .map(|p| ArrayD::zeros(p.value.raw_dim()))
                .collect(),
        }
    }
}

/// One bias-corrected Adam update over `params`, consuming their gradients.
///
/// Applies `value -= lr * m_hat / (sqrt(v_hat) + eps)` with
/// `m_hat = m / (1 - beta1^t)` and `v_hat = v / (1 - beta2^t)`, then zeroes
/// every gradient and increments the step counter.
pub fn adam_step(
    params: &mut [&mut Parameter],
    state: &mut AdamState,
    lr: f64,
) -> Result<(), NumericError> {
    if params.len() != state.m.len() {
        return Err(NumericError::StateMismatch {
            state: state.m.len(),
            params: params.len(),
        });
    }
    state.t += 1;
    let t = state.t as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);
    for (i, param) in params.iter_mut().enumerate() {
        if param.value.shape() != state.m[i].shape() {
            return Err(NumericError::ShapeMismatch {
                op: "adam_step",
                details: format!(
                    "parameter {} is {:?}, state is {:?}",
                    param.name,
                    param.value.shape(),
                    state.m[i].shape()
                ),
            });
        }
        let m = &mut state.m[i];
        let v = &mut state.v[i];
        for (((value, grad), m), v) in param
            .value
            .iter_mut()
            .zip(param.grad.iter())
            .zip(m.iter_mut())
            .zip(v.iter_mut())
        {
            *m = state.beta1 * *m + (1.0 - state.beta1) * grad;
            *v = state.beta2 * *v + (1.0 - state.beta2) * grad * grad;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *value -= lr * m_hat / (v_hat.sqrt() + state.eps);
        }
        param.zero_grad();
    }
    Ok(())
}
