//! Central finite-difference gradient checking.
//!
//! The checker perturbs one scalar at a time and re-runs a caller-supplied
//! forward closure, so it is independent of the tape's backward rules by
//! construction. Every differentiable operation in this crate is required
//! to agree with it to a relative error below 1e-4 at 64-bit precision.

use ndarray::ArrayD;

/// Relative error between an analytic and a numeric derivative:
/// `|a - n| / max(|a|, |n|, 1e-8)`.
pub fn max_rel_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

/// Compare analytic gradients against central finite differences.
///
/// `forward` maps a full set of tensor values to a scalar; `values` holds
/// the point to differentiate at, and `analytic` the gradients to verify
/// (same shapes, same order). Returns the worst relative error over every
/// scalar component.
pub fn finite_difference_check<F>(
    mut forward: F,
    values: &[ArrayD<f64>],
    analytic: &[ArrayD<f64>],
    eps: f64,
) -> f64
where
    F: FnMut(&[ArrayD<f64>]) -> f64,
{
    assert_eq!(
        values.len(),
        analytic.len(),
        "one analytic gradient per value tensor"
    );
    let mut worst = 0.0_f64;
    let mut work: Vec<ArrayD<f64>> = values.to_vec();
    for (ti, grad) in analytic.iter().enumerate() {
        assert_eq!(
            grad.shape(),
            values[ti].shape(),
            "gradient shape must match value shape"
        );
        for flat in 0..values[ti].len() {
            let original = values[ti].as_slice().expect("contiguous")[flat];

            work[ti].as_slice_mut().expect("contiguous")[flat] = original + eps;
            let plus = forward(&work);
            work[ti].as_slice_mut().expect("contiguous")[flat] = original - eps;
            let minus = forward(&work);
            work[ti].as_slice_mut().expect("contiguous")[flat] = original;

            let numeric = (plus - minus) / (2.0 * eps);
            let a = grad.as_slice().expect("contiguous")[flat];
            worst = worst.max(max_rel_error(a, numeric));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{ArrayD, IxDyn};

    #[test]
    fn linear_function_is_exact() {
        // f(x) = 3x + 2, df/dx = 3: central differences are exact for
        // linear functions up to round-off.
        let values = vec![ArrayD::from_elem(IxDyn(&[1]), 1.25)];
        let analytic = vec![ArrayD::from_elem(IxDyn(&[1]), 3.0)];
        let err = finite_difference_check(
            |vs| 3.0 * vs[0][[0]] + 2.0,
            &values,
            &analytic,
            1e-5,
        );
        assert!(err < 1e-10, "relative error {err}");
    }

    #[test]
    fn constant_function_has_zero_gradient() {
        let values = vec![ArrayD::from_elem(IxDyn(&[3]), 0.5)];
        let analytic = vec![ArrayD::zeros(IxDyn(&[3]))];
        let err = finite_difference_check(|_| 4.2, &values, &analytic, 1e-5);
        assert_eq!(err, 0.0);
    }

    #[test]
    fn wrong_gradient_is_detected() {
        let values = vec![ArrayD::from_elem(IxDyn(&[1]), 2.0)];
        // f(x) = x^2 at x=2 has gradient 4; claim 5.
        let analytic = vec![ArrayD::from_elem(IxDyn(&[1]), 5.0)];
        let err =
            finite_difference_check(|vs| vs[0][[0]] * vs[0][[0]], &values, &analytic, 1e-5);
        assert!(err > 0.1, "relative error {err}");
    }
}
