use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

use super::config::AdamHyper;
use super::params::{ModelParams, Moments};

/// One Adam update of both branches. The step counter is shared; moments
/// are kept per branch and never mix.
pub fn adam_step(
    params: &mut ModelParams,
    source_grads: &[DenseMatrix],
    target_grads: &[DenseMatrix],
    learning_rate: f64,
    hyper: &AdamHyper,
) -> Result<()> {
    check_shapes(&params.source, source_grads)?;
    check_shapes(&params.target, target_grads)?;
    params.adam.step += 1;
    let t = params.adam.step as i32;
    let correction1 = 1.0 - hyper.beta1.powi(t);
    let correction2 = 1.0 - hyper.beta2.powi(t);
    update_stack(&mut params.source, &mut params.adam.source, source_grads, learning_rate, hyper, correction1, correction2);
    update_stack(&mut params.target, &mut params.adam.target, target_grads, learning_rate, hyper, correction1, correction2);
    Ok(())
}

fn check_shapes(weights: &[DenseMatrix], grads: &[DenseMatrix]) -> Result<()> {
    if weights.len() != grads.len() {
        return Err(Error::dims("adam: gradient count", weights.len(), grads.len()));
    }
    for (w, g) in weights.iter().zip(grads) {
        if w.shape() != g.shape() {
            return Err(Error::dims("adam: gradient shape", format!("{:?}", w.shape()), format!("{:?}", g.shape())));
        }
    }
    Ok(())
}

fn update_stack(
    weights: &mut [DenseMatrix],
    moments: &mut Moments,
    grads: &[DenseMatrix],
    lr: f64,
    hyper: &AdamHyper,
    correction1: f64,
    correction2: f64,
) {
    for (((w, m), v), g) in weights
        .iter_mut()
        .zip(&mut moments.first)
        .zip(&mut moments.second)
        .zip(grads)
    {
        let w = w.as_mut_slice();
        let m = m.as_mut_slice();
        let v = v.as_mut_slice();
        for idx in 0..w.len() {
            let gi = g.as_slice()[idx];
            m[idx] = hyper.beta1 * m[idx] + (1.0 - hyper.beta1) * gi;
            v[idx] = hyper.beta2 * v[idx] + (1.0 - hyper.beta2) * gi * gi;
            let m_hat = m[idx] / correction1;
            let v_hat = v[idx] / correction2;
            w[idx] -= lr * m_hat / (v_hat.sqrt() + hyper.epsilon);
        }
    }
}
