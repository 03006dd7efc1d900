use serde::{Deserialize, Serialize};

use super::model::{Grads, ModelGraph};
use super::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamParams {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        AdamParams {
            learning_rate: 0.003,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdamState<T> {
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
    t: i32,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(model: &ModelGraph<T>) -> Self {
        let zeros: Vec<Vec<T>> = model
            .params()
            .iter()
            .map(|p| vec![T::zero(); p.len()])
            .collect();
        AdamState {
            m: zeros.clone(),
            v: zeros,
            t: 0,
        }
    }

    pub fn steps(&self) -> i32 {
        self.t
    }
}

/// One bias-corrected Adam update of every parameter tensor.
pub fn adam_step<T: Scalar>(
    params: Vec<&mut Vec<T>>,
    grads: &Grads<T>,
    state: &mut AdamState<T>,
    hp: &AdamParams,
) {
    state.t += 1;
    let f = |x: f64| T::from(x).unwrap();
    let (b1, b2) = (f(hp.beta1), f(hp.beta2));
    let c1 = f(1.0 - hp.beta1.powi(state.t));
    let c2 = f(1.0 - hp.beta2.powi(state.t));
    let (lr, eps) = (f(hp.learning_rate), f(hp.epsilon));
    let one = T::one();
    for (((p, g), m), v) in params
        .into_iter()
        .zip(&grads.tensors)
        .zip(&mut state.m)
        .zip(&mut state.v)
    {
        for i in 0..p.len() {
            m[i] = b1 * m[i] + (one - b1) * g[i];
            v[i] = b2 * v[i] + (one - b2) * g[i] * g[i];
            let mh = m[i] / c1;
            let vh = v[i] / c2;
            p[i] -= lr * mh / (vh.sqrt() + eps);
        }
    }
}
