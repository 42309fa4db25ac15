//! All-ranking top-K evaluation, the ItemPop baseline, and the ablation,
//! correlation and temperature analyses.

mod analysis;
mod correlation;
mod metrics;
mod ranking;
mod report;

pub use analysis::{
    evaluate_id_ood, run_ablation_popgo_s, tau_sweep, AblationReport, SplitReports, TauRow, DEFAULT_TAUS,
};
pub use correlation::{correlation_analysis, interaction_losses, pearson, CorrelationReport, InteractionLosses};
pub use metrics::{discount, metrics_at_k, UserMetrics};
pub use ranking::{itempop_baseline, rank_all_items, rank_scores, ItemPop, ModelScorer, RandomRanker, Ranker};
pub use report::{evaluate, RankingReport, UserRow, DEFAULT_K};
