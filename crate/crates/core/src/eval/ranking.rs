use std::cmp::Ordering;

use crate::backbone::{dot, norm, Model, Representations, ScoreKind};
use crate::data::PopularityTable;

/// Anything that scores every item for a user.
pub trait Ranker: Sync {
    fn n_items(&self) -> usize;

    /// Writes one score per item into `out` (length `n_items`).
    fn score_items(&self, user: usize, out: &mut [f64]);
}

/// Scores from a model's propagated representations.
#[derive(Debug, Clone)]
pub struct ModelScorer {
    reps: Representations,
    kind: ScoreKind,
}

impl ModelScorer {
    pub fn new(model: &Model) -> Self {
        let mut reps = model.propagate();
        if model.score_kind == ScoreKind::Cosine {
            normalize_rows(&mut reps.users);
            normalize_rows(&mut reps.items);
        }
        Self {
            reps,
            kind: model.score_kind,
        }
    }
}

fn normalize_rows(t: &mut crate::backbone::EmbeddingTable) {
    for r in 0..t.rows() {
        let n = norm(t.row(r));
        if n > 0.0 {
            for v in t.row_mut(r) {
                *v /= n;
            }
        }
    }
}

impl Ranker for ModelScorer {
    fn n_items(&self) -> usize {
        self.reps.items.rows()
    }

    fn score_items(&self, user: usize, out: &mut [f64]) {
        let u = self.reps.users.row(user);
        for (i, o) in out.iter_mut().enumerate() {
            let d = dot(u, self.reps.items.row(i));
            *o = match self.kind {
                ScoreKind::SigmoidInner => crate::backbone::sigmoid(d),
                ScoreKind::Cosine | ScoreKind::Inner => d,
            };
        }
    }
}

/// Non-personalized ranker scoring items by training frequency.
#[derive(Debug, Clone)]
pub struct ItemPop {
    scores: Vec<f64>,
}

pub fn itempop_baseline(pop: &PopularityTable) -> ItemPop {
    ItemPop {
        scores: pop.item_pop.iter().map(|&d| d as f64).collect(),
    }
}

impl Ranker for ItemPop {
    fn n_items(&self) -> usize {
        self.scores.len()
    }

    fn score_items(&self, _user: usize, out: &mut [f64]) {
        out.copy_from_slice(&self.scores);
    }
}

/// Seeded uniform-random scores, a reference point for baselines.
#[derive(Debug, Clone)]
pub struct RandomRanker {
    n_items: usize,
    seed: u64,
}

impl RandomRanker {
    pub fn new(n_items: usize, seed: u64) -> Self {
        Self { n_items, seed }
    }
}

impl Ranker for RandomRanker {
    fn n_items(&self) -> usize {
        self.n_items
    }

    fn score_items(&self, user: usize, out: &mut [f64]) {
        use rand::Rng;
        let mut rng = crate::rng::seeded(self.seed, 1_000 + user as u64);
        for o in out.iter_mut() {
            *o = rng.random();
        }
    }
}

/// Descending score, ties by ascending item index.
#[inline]
fn rank_order(scores: &[f64], a: usize, b: usize) -> Ordering {
    scores[b].total_cmp(&scores[a]).then(a.cmp(&b))
}

/// Every non-excluded item in rank order. `exclude` must be sorted.
pub fn rank_all_items(ranker: &dyn Ranker, user: usize, exclude: &[usize]) -> Vec<usize> {
    let mut scores = vec![0.0; ranker.n_items()];
    ranker.score_items(user, &mut scores);
    rank_scores(&scores, exclude, usize::MAX)
}

/// First `k` items of the ranking of `scores` with `exclude` removed.
pub fn rank_scores(scores: &[f64], exclude: &[usize], k: usize) -> Vec<usize> {
    let mut items: Vec<usize> = (0..scores.len())
        .filter(|i| exclude.binary_search(i).is_err())
        .collect();
    if k < items.len() {
        items.select_nth_unstable_by(k, |&a, &b| rank_order(scores, a, b));
        items.truncate(k);
    }
    items.sort_unstable_by(|&a, &b| rank_order(scores, a, b));
    items
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Fixed(Vec<f64>);
    impl Ranker for Fixed {
        fn n_items(&self) -> usize {
            self.0.len()
        }
        fn score_items(&self, _: usize, out: &mut [f64]) {
            out.copy_from_slice(&self.0);
        }
    }

    #[test]
    fn ties_by_index() {
        let r = Fixed(vec![0.9, 0.9, 0.1]);
        assert_eq!(rank_all_items(&r, 0, &[]), vec![0, 1, 2]);
    }

    #[test]
    fn exclude_all_but_one() {
        let r = Fixed(vec![0.3, 0.2, 0.8, 0.5]);
        assert_eq!(rank_all_items(&r, 0, &[0, 2, 3]), vec![1]);
    }

    #[test]
    fn top_k_agrees_with_full_sort() {
        let scores: Vec<f64> = (0..40).map(|i| ((i * 7919) % 13) as f64).collect();
        let full = rank_scores(&scores, &[3, 5], usize::MAX);
        for k in [0, 1, 5, 17, 38, 50] {
            assert_eq!(rank_scores(&scores, &[3, 5], k), full[..k.min(full.len())]);
        }
    }

    #[test]
    fn itempop_most_popular_first() {
        let train = [
            crate::data::Interaction::new(0, 2),
            crate::data::Interaction::new(1, 2),
            crate::data::Interaction::new(1, 0),
        ];
        let pop = crate::data::build_popularity_table(&train, 3, 3).unwrap();
        let ip = itempop_baseline(&pop);
        for u in 0..3 {
            assert_eq!(rank_all_items(&ip, u, &[])[0], 2);
        }
    }
}
