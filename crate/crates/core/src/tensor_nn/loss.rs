use super::Scalar;

const PROB_EPS: f64 = 1e-12;

/// Numerically stable softmax.
pub fn softmax<T: Scalar>(z: &[T]) -> Vec<T> {
    let m = z.iter().copied().fold(T::neg_infinity(), T::max);
    let e: Vec<T> = z.iter().map(|&v| (v - m).exp()).collect();
    let s: T = e.iter().copied().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// `-w · ln(p[label] + 1e-12)`.
pub fn loss_weighted_ce<T: Scalar>(probs: &[T], label: usize, weight: T) -> T {
    -weight * (probs[label] + T::from(PROB_EPS).unwrap()).ln()
}

/// Gradient of [`loss_weighted_ce`] with respect to the probabilities.
pub fn loss_weighted_ce_grad<T: Scalar>(probs: &[T], label: usize, weight: T) -> Vec<T> {
    let mut g = vec![T::zero(); probs.len()];
    g[label] = -weight / (probs[label] + T::from(PROB_EPS).unwrap());
    g
}

/// Inverse-frequency weights `N / (C · N_c)`. Absent classes get weight 1.
pub fn class_weights(counts: &[usize]) -> Vec<f64> {
    let n: usize = counts.iter().sum();
    let c = counts.len() as f64;
    counts
        .iter()
        .map(|&k| {
            if k == 0 {
                1.0
            } else {
                n as f64 / (c * k as f64)
            }
        })
        .collect()
}
