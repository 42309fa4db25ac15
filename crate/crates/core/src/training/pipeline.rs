use std::sync::Arc;

use super::{train_plain, train_popgo, train_shortcut, TrainOutcome, TrainingConfig, TrainingLog};
use crate::backbone::{Arch, Model, NormalizedAdjacency, ScoreKind};
use crate::data::{build_popularity_table, DatasetSplits};
use crate::shortcut::{build_shortcut_model, ShortcutModel};
use crate::Result;

/// Train adjacency when `arch` needs one.
pub fn train_graph(arch: Arch, splits: &DatasetSplits) -> Result<Option<Arc<NormalizedAdjacency>>> {
    Ok(match arch {
        Arch::Mf => None,
        Arch::LightGcn { .. } => Some(Arc::new(NormalizedAdjacency::build(
            &splits.train,
            splits.n_users,
            splits.n_items,
        )?)),
    })
}

/// Freshly initialized cosine-scored target model.
pub fn init_target(arch: Arch, splits: &DatasetSplits, cfg: &TrainingConfig) -> Result<Model> {
    let graph = train_graph(arch, splits)?;
    Model::init(splits.n_users, splits.n_items, cfg.dim, arch, ScoreKind::Cosine, graph, cfg.seed)
}

/// Plain backbone (also the PopGo-S ablation: all mask values 1).
pub fn fit_plain(arch: Arch, splits: &DatasetSplits, cfg: &TrainingConfig) -> Result<TrainOutcome> {
    train_plain(init_target(arch, splits, cfg)?, splits, cfg)
}

/// The full pipeline: popularity table, shortcut pretraining and freezing,
/// then masked target training.
pub struct PopgoFit {
    pub shortcut: ShortcutModel,
    pub shortcut_log: TrainingLog,
    pub target: TrainOutcome,
}

pub fn fit_shortcut(arch: Arch, splits: &DatasetSplits, cfg: &TrainingConfig) -> Result<(ShortcutModel, TrainingLog)> {
    let pop = build_popularity_table(&splits.train, splits.n_users, splits.n_items)?;
    let graph = train_graph(arch, splits)?;
    let sm = build_shortcut_model(arch, pop, cfg.dim, cfg.seed, graph)?;
    train_shortcut(sm, splits, cfg)
}

pub fn fit_popgo(arch: Arch, splits: &DatasetSplits, cfg: &TrainingConfig) -> Result<PopgoFit> {
    let (shortcut, shortcut_log) = fit_shortcut(arch, splits, cfg)?;
    let target = train_popgo(init_target(arch, splits, cfg)?, &shortcut, splits, cfg)?;
    Ok(PopgoFit {
        shortcut,
        shortcut_log,
        target,
    })
}
