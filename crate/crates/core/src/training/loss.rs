/// Sampled softmax loss of the candidate at index 0 against the rest.
///
/// `scores[0]` is the positive, `scores[1..]` its negatives. Returns
/// `-log softmax(scores / tau)[0]` and the gradient with respect to every
/// score. Logits are shifted by their maximum before exponentiation.
pub fn sampled_softmax_loss(scores: &[f64], tau: f64) -> (f64, Vec<f64>) {
    let mut grad = vec![0.0; scores.len()];
    let loss = softmax_loss_into(scores, tau, &mut grad);
    (loss, grad)
}

/// Masked loss: the softmax runs over `alpha_j * beta_j`. The mask is a
/// constant, so `d/d alpha_j = beta_j * (softmax gradient at alpha_j beta_j)`.
pub fn popgo_loss(alpha: &[f64], beta: &[f64], tau: f64) -> (f64, Vec<f64>) {
    assert_eq!(alpha.len(), beta.len(), "one mask value per candidate");
    let masked: Vec<f64> = alpha.iter().zip(beta).map(|(a, b)| a * b).collect();
    let (loss, mut grad) = sampled_softmax_loss(&masked, tau);
    for (g, b) in grad.iter_mut().zip(beta) {
        *g *= b;
    }
    (loss, grad)
}

/// Allocation-free core of [`sampled_softmax_loss`]; `grad` must have the
/// same length as `scores`.
pub(crate) fn softmax_loss_into(scores: &[f64], tau: f64, grad: &mut [f64]) -> f64 {
    debug_assert!(tau > 0.0);
    debug_assert!(!scores.is_empty());
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (g, &s) in grad.iter_mut().zip(scores) {
        let e = ((s - max) / tau).exp();
        *g = e;
        sum += e;
    }
    let inv_tau = 1.0 / tau;
    for g in grad.iter_mut() {
        *g = *g / sum * inv_tau;
    }
    grad[0] -= inv_tau;
    sum.ln() - (scores[0] - max) / tau
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_candidates() {
        let (loss, grad) = sampled_softmax_loss(&[0.3; 65], 0.07);
        assert!((loss - 65f64.ln()).abs() < 1e-12);
        assert!((loss - 4.174387).abs() < 1e-6);
        // gradient sums to zero
        assert!(grad.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn loss_decreases_to_zero_as_positive_grows() {
        let mut prev = f64::INFINITY;
        for step in 0..50 {
            let pos = -1.0 + step as f64 * 0.2;
            let (loss, _) = sampled_softmax_loss(&[pos, 0.1, -0.2, 0.4], 0.07);
            assert!(loss < prev || (loss == 0.0 && prev == 0.0));
            prev = loss;
        }
        assert!(prev < 1e-30);
        assert!(prev >= 0.0);
    }

    #[test]
    fn extreme_logits_stay_finite() {
        let (loss, grad) = sampled_softmax_loss(&[-49.0, 49.0, 0.0], 0.07);
        assert!(loss.is_finite());
        assert!((loss - 98.0 / 0.07).abs() < 1e-6);
        assert!(grad.iter().all(|g| g.is_finite()));
    }

    #[test]
    fn identity_and_zero_masks() {
        let alpha = [0.5, -0.1, 0.9, 0.2];
        assert_eq!(popgo_loss(&alpha, &[1.0; 4], 0.07), sampled_softmax_loss(&alpha, 0.07));
        let (loss, grad) = popgo_loss(&alpha, &[0.0; 4], 0.07);
        assert!((loss - 4f64.ln()).abs() < 1e-12);
        assert!(grad.iter().all(|&g| g == 0.0));
    }
}
