/// Per-user top-K metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserMetrics {
    pub hit: bool,
    pub recall: f64,
    pub ndcg: f64,
}

/// HR / Recall / NDCG at `k` for one ranked list.
///
/// Gain is 1 per relevant item with discount `1 / log2(rank + 1)` (rank
/// 1-based); the ideal DCG fills `min(k, |relevant|)` slots. `relevant` must
/// be sorted and non-empty.
pub fn metrics_at_k(ranked: &[usize], relevant: &[usize], k: usize) -> UserMetrics {
    debug_assert!(!relevant.is_empty());
    debug_assert!(relevant.windows(2).all(|w| w[0] < w[1]));
    let mut hits = 0usize;
    let mut dcg = 0.0;
    for (pos, item) in ranked.iter().take(k).enumerate() {
        if relevant.binary_search(item).is_ok() {
            hits += 1;
            dcg += discount(pos);
        }
    }
    let ideal: f64 = (0..k.min(relevant.len())).map(discount).sum();
    UserMetrics {
        hit: hits > 0,
        recall: hits as f64 / relevant.len() as f64,
        ndcg: if ideal > 0.0 { dcg / ideal } else { 0.0 },
    }
}

/// Discount of the 0-based position `pos`.
#[inline]
pub fn discount(pos: usize) -> f64 {
    1.0 / ((pos + 2) as f64).log2()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_single_item() {
        let m = metrics_at_k(&[4, 1, 2], &[4], 20);
        assert_eq!(m, UserMetrics { hit: true, recall: 1.0, ndcg: 1.0 });
    }

    #[test]
    fn rank_three_discount() {
        let m = metrics_at_k(&[9, 8, 4, 1], &[4], 20);
        assert!(m.hit);
        assert_eq!(m.recall, 1.0);
        assert_eq!(m.ndcg, 0.5);
    }

    #[test]
    fn outside_cutoff() {
        let ranked: Vec<usize> = (0..30).collect();
        let m = metrics_at_k(&ranked, &[20], 20);
        assert_eq!(m, UserMetrics { hit: false, recall: 0.0, ndcg: 0.0 });
    }

    #[test]
    fn k_zero() {
        let m = metrics_at_k(&[1, 2], &[1], 0);
        assert_eq!(m, UserMetrics { hit: false, recall: 0.0, ndcg: 0.0 });
    }
}
