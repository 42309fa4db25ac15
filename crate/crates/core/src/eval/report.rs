use rayon::prelude::*;

use super::metrics::{metrics_at_k, UserMetrics};
use super::ranking::{rank_scores, Ranker};
use crate::data::{user_item_lists, DatasetSplits, SplitName};
use crate::{Error, Result};

/// Default cutoff.
pub const DEFAULT_K: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct UserRow {
    pub user: usize,
    pub n_relevant: usize,
    pub metrics: UserMetrics,
}

/// Aggregated all-ranking metrics for one split.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingReport {
    pub split: SplitName,
    pub k: usize,
    pub users: Vec<UserRow>,
    pub hr: f64,
    pub recall: f64,
    pub ndcg: f64,
}

impl RankingReport {
    pub fn n_evaluated_users(&self) -> usize {
        self.users.len()
    }
}

/// Evaluates `ranker` on one split by ranking every item per user.
///
/// Train positives are always excluded from the ranking; validation
/// positives are also excluded when a test split is evaluated. Only users
/// with at least one positive in the split count, each with equal weight.
pub fn evaluate(ranker: &dyn Ranker, splits: &DatasetSplits, which: SplitName, k: usize) -> Result<RankingReport> {
    if which == SplitName::Train {
        return Err(Error::InvalidArgument("evaluation on the train split is not supported".into()));
    }
    let target = splits.get(which);
    if target.is_empty() {
        return Err(Error::EmptyInput("evaluation split"));
    }
    if ranker.n_items() != splits.n_items {
        return Err(Error::ShapeMismatch(format!(
            "ranker scores {} items, splits have {}",
            ranker.n_items(),
            splits.n_items
        )));
    }
    let relevant = user_item_lists(target, splits.n_users);
    let mut exclude = user_item_lists(&splits.train, splits.n_users);
    if matches!(which, SplitName::IdTest | SplitName::OodTest) {
        for it in &splits.id_valid {
            exclude[it.user].push(it.item);
        }
        for l in &mut exclude {
            l.sort_unstable();
            l.dedup();
        }
    }

    let users: Vec<UserRow> = (0..splits.n_users)
        .into_par_iter()
        .filter(|&u| !relevant[u].is_empty())
        .map_init(
            || vec![0.0; splits.n_items],
            |scores, u| {
                ranker.score_items(u, scores);
                let top = rank_scores(scores, &exclude[u], k);
                UserRow {
                    user: u,
                    n_relevant: relevant[u].len(),
                    metrics: metrics_at_k(&top, &relevant[u], k),
                }
            },
        )
        .collect();

    let n = users.len() as f64;
    let mean = |f: fn(&UserMetrics) -> f64| users.iter().map(|r| f(&r.metrics)).sum::<f64>() / n;
    Ok(RankingReport {
        split: which,
        k,
        hr: mean(|m| if m.hit { 1.0 } else { 0.0 }),
        recall: mean(|m| m.recall),
        ndcg: mean(|m| m.ndcg),
        users,
    })
}
